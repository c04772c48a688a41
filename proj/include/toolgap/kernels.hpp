#pragma once

#include <cstddef>

namespace toolgap {

// Row-major dense kernels for the gate MLP. The parallel versions split work
// across rows of the output; every output element is accumulated in the same
// serial order as the reference path, so results are bit-identical for any
// thread count. The *_serial functions are the reference implementations kept
// for testing and benchmarking.

// c[m*n] = a[m*k] * b[k*n]
void matmul(const double* a, const double* b, double* c, int m, int k, int n);
void matmul_serial(const double* a, const double* b, double* c, int m, int k, int n);

// c[m*n] = a[k*m]^T * b[k*n]
void matmul_at_b(const double* a, const double* b, double* c, int m, int k, int n);
void matmul_at_b_serial(const double* a, const double* b, double* c, int m, int k, int n);

// c[m*n] = a[m*k] * b[n*k]^T
void matmul_a_bt(const double* a, const double* b, double* c, int m, int k, int n);
void matmul_a_bt_serial(const double* a, const double* b, double* c, int m, int k, int n);

// y[m*n] = relu(x[m*n] + broadcast bias[n])
void add_bias_relu(const double* x, const double* bias, double* y, int m, int n);
void add_bias_relu_serial(const double* x, const double* bias, double* y, int m, int n);

// grad_in[m*n] = grad_out[m*n] where activation > 0, else 0
void relu_backward(const double* grad_out, const double* activation, double* grad_in, int m,
                   int n);
void relu_backward_serial(const double* grad_out, const double* activation, double* grad_in,
                          int m, int n);

// bias_grad[n] = column sums of g[m*n]
void column_sums(const double* g, double* bias_grad, int m, int n);
void column_sums_serial(const double* g, double* bias_grad, int m, int n);

}  // namespace toolgap
