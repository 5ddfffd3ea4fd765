#include <algorithm>
#include <cmath>

#include "trollkit/errors.hpp"
#include "trollkit/model.hpp"
#include "trollkit/parallel.hpp"

namespace trollkit::kernels {

namespace {

struct Shape {
    std::size_t n, k, d, sparse, dense;
};

Shape shape_of(const Dataset& data, std::span<const double> params)
{
    Shape s{data.rows(), data.num_classes(), data.width(), data.sparse_width(), data.dense_width()};
    if (params.size() != s.k * (s.d + 1))
        throw InputError("parameter vector has " + std::to_string(params.size()) + " entries, expected " +
                         std::to_string(s.k * (s.d + 1)));
    if (s.n == 0)
        throw InputError("empty dataset");
    return s;
}

// z = W x_i + b for one row.
void row_scores(const Dataset& data, const Shape& s, std::span<const double> params, std::size_t i, double* z)
{
    const double* W = params.data();
    const double* b = params.data() + s.k * s.d;
    const auto& ptr = data.row_ptr();
    const auto& col = data.col_idx();
    const auto& val = data.values();
    const double* x = data.dense_row(i);
    for (std::size_t k = 0; k < s.k; ++k) {
        const double* w = W + k * s.d;
        double acc = b[k];
        for (std::size_t p = ptr[i]; p < ptr[i + 1]; ++p)
            acc += w[col[p]] * val[p];
        for (std::size_t t = 0; t < s.dense; ++t)
            acc += w[s.sparse + t] * x[t];
        z[k] = acc;
    }
}

// Turns scores into (p - onehot)/n in place when residual is set; returns the row loss.
double row_loss(double* z, std::size_t k, std::uint32_t y, double inv_n, bool residual)
{
    double m = z[0];
    for (std::size_t c = 1; c < k; ++c)
        m = std::max(m, z[c]);
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c)
        sum += std::exp(z[c] - m);
    const double loss = std::log(sum) + m - z[y];
    if (residual) {
        for (std::size_t c = 0; c < k; ++c) {
            double p = std::exp(z[c] - m) / sum;
            z[c] = (p - (c == y ? 1.0 : 0.0)) * inv_n;
        }
    }
    return loss;
}

double penalty(const Shape& s, std::span<const double> params, double lambda)
{
    double sq = 0.0;
    for (std::size_t j = 0; j < s.k * s.d; ++j)
        sq += params[j] * params[j];
    return 0.5 * lambda * sq;
}

double mean(const std::vector<double>& losses)
{
    double total = 0.0;
    for (double l : losses)
        total += l;
    return total / static_cast<double>(losses.size());
}

} // namespace

double objective(const Dataset& data, std::span<const double> params, double lambda)
{
    const Shape s = shape_of(data, params);
    std::vector<double> z(s.n * s.k);
    std::vector<double> losses(s.n);
    const auto n = static_cast<std::ptrdiff_t>(s.n);
    TROLLKIT_OMP_PARALLEL_FOR
    for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
        auto i = static_cast<std::size_t>(ii);
        row_scores(data, s, params, i, &z[i * s.k]);
        losses[i] = row_loss(&z[i * s.k], s.k, data.labels()[i], 0.0, false);
    }
    return mean(losses) + penalty(s, params, lambda);
}

double objective_gradient(const Dataset& data, std::span<const double> params, double lambda, std::span<double> grad)
{
    const Shape s = shape_of(data, params);
    if (grad.size() != params.size())
        throw InputError("gradient buffer has the wrong size");
    const double inv_n = 1.0 / static_cast<double>(s.n);
    std::vector<double> r(s.n * s.k);
    std::vector<double> losses(s.n);
    const auto n = static_cast<std::ptrdiff_t>(s.n);
    TROLLKIT_OMP_PARALLEL_FOR
    for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
        auto i = static_cast<std::size_t>(ii);
        row_scores(data, s, params, i, &r[i * s.k]);
        losses[i] = row_loss(&r[i * s.k], s.k, data.labels()[i], inv_n, true);
    }

    const auto& cptr = data.col_ptr();
    const auto& rows = data.row_idx();
    const auto& cval = data.col_values();
    const auto d = static_cast<std::ptrdiff_t>(s.d);
    TROLLKIT_OMP_PARALLEL_FOR
    for (std::ptrdiff_t jj = 0; jj < d; ++jj) {
        auto j = static_cast<std::size_t>(jj);
        for (std::size_t k = 0; k < s.k; ++k) {
            double acc = 0.0;
            if (j < s.sparse) {
                for (std::size_t p = cptr[j]; p < cptr[j + 1]; ++p)
                    acc += r[rows[p] * s.k + k] * cval[p];
            } else {
                const std::size_t t = j - s.sparse;
                for (std::size_t i = 0; i < s.n; ++i)
                    acc += r[i * s.k + k] * data.dense_row(i)[t];
            }
            grad[k * s.d + j] = acc + lambda * params[k * s.d + j];
        }
    }
    for (std::size_t k = 0; k < s.k; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < s.n; ++i)
            acc += r[i * s.k + k];
        grad[s.k * s.d + k] = acc;
    }
    return mean(losses) + penalty(s, params, lambda);
}

namespace serial {

double objective(const Dataset& data, std::span<const double> params, double lambda)
{
    const Shape s = shape_of(data, params);
    std::vector<double> z(s.k);
    std::vector<double> losses(s.n);
    for (std::size_t i = 0; i < s.n; ++i) {
        row_scores(data, s, params, i, z.data());
        losses[i] = row_loss(z.data(), s.k, data.labels()[i], 0.0, false);
    }
    return mean(losses) + penalty(s, params, lambda);
}

double objective_gradient(const Dataset& data, std::span<const double> params, double lambda, std::span<double> grad)
{
    const Shape s = shape_of(data, params);
    if (grad.size() != params.size())
        throw InputError("gradient buffer has the wrong size");
    const double inv_n = 1.0 / static_cast<double>(s.n);
    std::fill(grad.begin(), grad.end(), 0.0);
    std::vector<double> r(s.k);
    std::vector<double> losses(s.n);
    const auto& ptr = data.row_ptr();
    const auto& col = data.col_idx();
    const auto& val = data.values();
    double* gW = grad.data();
    double* gb = grad.data() + s.k * s.d;
    for (std::size_t i = 0; i < s.n; ++i) {
        row_scores(data, s, params, i, r.data());
        losses[i] = row_loss(r.data(), s.k, data.labels()[i], inv_n, true);
        for (std::size_t p = ptr[i]; p < ptr[i + 1]; ++p)
            for (std::size_t k = 0; k < s.k; ++k)
                gW[k * s.d + col[p]] += r[k] * val[p];
        const double* x = data.dense_row(i);
        for (std::size_t t = 0; t < s.dense; ++t)
            for (std::size_t k = 0; k < s.k; ++k)
                gW[k * s.d + s.sparse + t] += r[k] * x[t];
        for (std::size_t k = 0; k < s.k; ++k)
            gb[k] += r[k];
    }
    for (std::size_t j = 0; j < s.k * s.d; ++j)
        gW[j] += lambda * params[j];
    return mean(losses) + penalty(s, params, lambda);
}

} // namespace serial

} // namespace trollkit::kernels
