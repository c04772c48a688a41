#include "toolgap/kernels.hpp"

namespace toolgap {

void matmul(const double* a, const double* b, double* c, int m, int k, int n) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
            c[i * n + j] = acc;
        }
    }
}

void matmul_serial(const double* a, const double* b, double* c, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
            c[i * n + j] = acc;
        }
    }
}

void matmul_at_b(const double* a, const double* b, double* c, int m, int k, int n) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int p = 0; p < k; ++p) acc += a[p * m + i] * b[p * n + j];
            c[i * n + j] = acc;
        }
    }
}

void matmul_at_b_serial(const double* a, const double* b, double* c, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int p = 0; p < k; ++p) acc += a[p * m + i] * b[p * n + j];
            c[i * n + j] = acc;
        }
    }
}

void matmul_a_bt(const double* a, const double* b, double* c, int m, int k, int n) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int p = 0; p < k; ++p) acc += a[i * k + p] * b[j * k + p];
            c[i * n + j] = acc;
        }
    }
}

void matmul_a_bt_serial(const double* a, const double* b, double* c, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int p = 0; p < k; ++p) acc += a[i * k + p] * b[j * k + p];
            c[i * n + j] = acc;
        }
    }
}

void add_bias_relu(const double* x, const double* bias, double* y, int m, int n) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            const double v = x[i * n + j] + bias[j];
            y[i * n + j] = v > 0.0 ? v : 0.0;
        }
    }
}

void add_bias_relu_serial(const double* x, const double* bias, double* y, int m, int n) {
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            const double v = x[i * n + j] + bias[j];
            y[i * n + j] = v > 0.0 ? v : 0.0;
        }
    }
}

void relu_backward(const double* grad_out, const double* activation, double* grad_in, int m,
                   int n) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            grad_in[i * n + j] = activation[i * n + j] > 0.0 ? grad_out[i * n + j] : 0.0;
        }
    }
}

void relu_backward_serial(const double* grad_out, const double* activation, double* grad_in,
                          int m, int n) {
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            grad_in[i * n + j] = activation[i * n + j] > 0.0 ? grad_out[i * n + j] : 0.0;
        }
    }
}

void column_sums(const double* g, double* bias_grad, int m, int n) {
#pragma omp parallel for schedule(static)
    for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int i = 0; i < m; ++i) acc += g[i * n + j];
        bias_grad[j] = acc;
    }
}

void column_sums_serial(const double* g, double* bias_grad, int m, int n) {
    for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int i = 0; i < m; ++i) acc += g[i * n + j];
        bias_grad[j] = acc;
    }
}

}  // namespace toolgap
