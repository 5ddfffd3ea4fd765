#pragma once

// Multinomial logistic regression trained by full-batch gradient descent,
// plus the majority-class baseline.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "trollkit/features.hpp"

namespace trollkit {

// Training matrix: CSR sparse block, row-major dense block, and a CSC copy of
// the sparse block for column-wise gradient accumulation.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::span<const FeatureVector> rows, std::span<const std::uint32_t> labels,
            std::vector<std::string> classes, std::size_t sparse_width, std::size_t dense_width);

    // Label strings outside `classes` throw InputError.
    static Dataset from_labels(std::span<const FeatureVector> rows, std::span<const std::string> labels,
                               std::vector<std::string> classes, std::size_t sparse_width, std::size_t dense_width);

    std::size_t rows() const { return labels_.size(); }
    std::size_t sparse_width() const { return sparse_width_; }
    std::size_t dense_width() const { return dense_width_; }
    std::size_t width() const { return sparse_width_ + dense_width_; }
    std::size_t num_classes() const { return classes_.size(); }
    const std::vector<std::string>& classes() const { return classes_; }
    const std::vector<std::uint32_t>& labels() const { return labels_; }

    // CSR
    const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
    const std::vector<std::uint32_t>& col_idx() const { return col_idx_; }
    const std::vector<double>& values() const { return values_; }
    // CSC, rows ascending within each column
    const std::vector<std::size_t>& col_ptr() const { return col_ptr_; }
    const std::vector<std::uint32_t>& row_idx() const { return row_idx_; }
    const std::vector<double>& col_values() const { return col_values_; }

    const double* dense_row(std::size_t i) const { return dense_.data() + i * dense_width_; }

private:
    std::size_t sparse_width_ = 0, dense_width_ = 0;
    std::vector<std::string> classes_;
    std::vector<std::uint32_t> labels_;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::uint32_t> col_idx_;
    std::vector<double> values_;
    std::vector<std::size_t> col_ptr_;
    std::vector<std::uint32_t> row_idx_;
    std::vector<double> col_values_;
    std::vector<double> dense_;
};

// Parameters are W (K x d, row-major) followed by b (K).
// J = mean cross-entropy + lambda/2 * ||W||^2.
namespace kernels {

double objective(const Dataset& data, std::span<const double> params, double lambda);
// Writes dJ/dparams into grad (same layout) and returns J.
double objective_gradient(const Dataset& data, std::span<const double> params, double lambda,
                          std::span<double> grad);

// Single-threaded row-scatter reference; bitwise equal to the kernels above.
namespace serial {
double objective(const Dataset& data, std::span<const double> params, double lambda);
double objective_gradient(const Dataset& data, std::span<const double> params, double lambda,
                          std::span<double> grad);
} // namespace serial

} // namespace kernels

struct TrainOptions {
    std::size_t max_iterations = 500;
    double gradient_tolerance = 1e-6; // infinity norm
    double armijo_c = 1e-4;
    double shrink = 0.5;
    bool parallel = true;
};

struct TrainInfo {
    std::size_t iterations = 0;
    double objective = 0.0;
    double gradient_norm = 0.0;
    bool converged = false;
    std::vector<double> history; // objective at the start and after each accepted step
};

struct LinearModel {
    std::vector<std::string> classes;
    std::size_t sparse_width = 0;
    std::size_t dense_width = 0;
    std::vector<double> weights; // K x d, row-major
    std::vector<double> bias;    // K
    double lambda = 0.0;
    TrainInfo info;

    std::size_t width() const { return sparse_width + dense_width; }
    double weight(std::size_t k, std::size_t column) const { return weights[k * width() + column]; }
};

// Throws DegenerateDataError when fewer than two classes have examples and
// InputError on negative lambda.
LinearModel train(const Dataset& data, double lambda, const TrainOptions& options = {});

std::vector<double> scores(const LinearModel& m, const FeatureVector& x);
std::vector<double> predict_proba(const LinearModel& m, const FeatureVector& x);
std::size_t predict(const LinearModel& m, const FeatureVector& x);
const std::string& predict_label(const LinearModel& m, const FeatureVector& x);

std::vector<double> softmax(std::span<const double> z);

inline const std::vector<double> kDefaultLambdaGrid{1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0};

struct TuneResult {
    double lambda = 0.0;
    std::vector<double> grid;
    std::vector<double> dev_accuracy; // parallel to grid
    LinearModel model;                // trained on the training split at lambda
};

// Maximizes dev accuracy over the grid; ties go to the larger lambda.
// `dev_rows`/`dev_labels` are label strings, scored against the model classes.
TuneResult tune_lambda(const Dataset& train_data, std::span<const FeatureVector> dev_rows,
                       std::span<const std::string> dev_labels, std::span<const double> grid = kDefaultLambdaGrid,
                       const TrainOptions& options = {});

struct MajorityModel {
    std::string label;
    std::string tie_break = "lexicographic-smallest";

    static MajorityModel fit(std::span<const std::string> labels);
};

// Text format with hexadecimal floats so load reproduces every bit.
void save_model(std::ostream& out, const LinearModel& m);
LinearModel load_model(std::istream& in);
void save_model_file(const std::filesystem::path& path, const LinearModel& m);
LinearModel load_model_file(const std::filesystem::path& path);

} // namespace trollkit
