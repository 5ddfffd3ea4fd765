#include "trollkit/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "trollkit/errors.hpp"

namespace trollkit {

// --- dataset ---------------------------------------------------------------

Dataset::Dataset(std::span<const FeatureVector> rows, std::span<const std::uint32_t> labels,
                 std::vector<std::string> classes, std::size_t sparse_width, std::size_t dense_width)
    : sparse_width_(sparse_width), dense_width_(dense_width), classes_(std::move(classes)),
      labels_(labels.begin(), labels.end())
{
    if (rows.size() != labels.size())
        throw InputError("dataset has " + std::to_string(rows.size()) + " rows but " + std::to_string(labels.size()) +
                         " labels");
    for (auto y : labels_)
        if (y >= classes_.size())
            throw InputError("label index out of range");
    std::vector<std::size_t> per_column(sparse_width_, 0);
    dense_.reserve(rows.size() * dense_width_);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& v = rows[i];
        std::int64_t last = -1;
        for (const auto& [j, x] : v.sparse) {
            if (j >= sparse_width_)
                throw InputError("row " + std::to_string(i) + ": column " + std::to_string(j) + " beyond sparse width");
            if (static_cast<std::int64_t>(j) <= last)
                throw InputError("row " + std::to_string(i) + ": sparse indices not strictly ascending");
            if (!std::isfinite(x))
                throw InputError("row " + std::to_string(i) + ": non-finite feature value");
            last = j;
            col_idx_.push_back(j);
            values_.push_back(x);
            ++per_column[j];
        }
        row_ptr_.push_back(col_idx_.size());
        if (v.dense.size() != dense_width_)
            throw InputError("row " + std::to_string(i) + ": dense block has " + std::to_string(v.dense.size()) +
                             " values, expected " + std::to_string(dense_width_));
        for (double x : v.dense) {
            if (!std::isfinite(x))
                throw InputError("row " + std::to_string(i) + ": non-finite feature value");
            dense_.push_back(x);
        }
    }

    col_ptr_.assign(sparse_width_ + 1, 0);
    for (std::size_t j = 0; j < sparse_width_; ++j)
        col_ptr_[j + 1] = col_ptr_[j] + per_column[j];
    row_idx_.resize(col_idx_.size());
    col_values_.resize(col_idx_.size());
    std::vector<std::size_t> fill(col_ptr_.begin(), col_ptr_.end() - 1);
    for (std::size_t i = 0; i + 1 < row_ptr_.size(); ++i) {
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
            auto slot = fill[col_idx_[p]]++;
            row_idx_[slot] = static_cast<std::uint32_t>(i);
            col_values_[slot] = values_[p];
        }
    }
}

Dataset Dataset::from_labels(std::span<const FeatureVector> rows, std::span<const std::string> labels,
                             std::vector<std::string> classes, std::size_t sparse_width, std::size_t dense_width)
{
    std::vector<std::uint32_t> y;
    y.reserve(labels.size());
    for (const auto& l : labels) {
        auto it = std::find(classes.begin(), classes.end(), l);
        if (it == classes.end())
            throw InputError("label '" + l + "' is not among the dataset classes");
        y.push_back(static_cast<std::uint32_t>(it - classes.begin()));
    }
    return Dataset(rows, y, std::move(classes), sparse_width, dense_width);
}

// --- training ---------------------------------------------------------------

namespace {

double inf_norm(const std::vector<double>& v)
{
    double m = 0.0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    return m;
}

} // namespace

LinearModel train(const Dataset& data, double lambda, const TrainOptions& options)
{
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw InputError("regularization strength must be finite and nonnegative");
    std::vector<bool> present(data.num_classes(), false);
    for (auto y : data.labels())
        present[y] = true;
    if (std::count(present.begin(), present.end(), true) < 2)
        throw DegenerateDataError("training data needs examples of at least two classes");

    auto objective = options.parallel ? kernels::objective : kernels::serial::objective;
    auto objective_gradient = options.parallel ? kernels::objective_gradient : kernels::serial::objective_gradient;

    const std::size_t k = data.num_classes();
    const std::size_t d = data.width();
    std::vector<double> params(k * (d + 1), 0.0);
    std::vector<double> grad(params.size());
    std::vector<double> trial(params.size());

    TrainInfo info;
    double j = objective_gradient(data, params, lambda, grad);
    info.history.push_back(j);
    double step = 1.0;
    for (;;) {
        info.gradient_norm = inf_norm(grad);
        if (info.gradient_norm <= options.gradient_tolerance) {
            info.converged = true;
            break;
        }
        if (info.iterations >= options.max_iterations)
            break;
        double gg = 0.0;
        for (double g : grad)
            gg += g * g;
        bool accepted = false;
        while (step > 1e-30) {
            for (std::size_t p = 0; p < params.size(); ++p)
                trial[p] = params[p] - step * grad[p];
            double jt = objective(data, trial, lambda);
            if (jt <= j - options.armijo_c * step * gg) {
                accepted = true;
                break;
            }
            step *= options.shrink;
        }
        if (!accepted)
            break;
        params.swap(trial);
        j = objective_gradient(data, params, lambda, grad);
        info.history.push_back(j);
        ++info.iterations;
        step = std::min(step * 2.0, 1e6);
    }
    info.objective = j;

    LinearModel m;
    m.classes = data.classes();
    m.sparse_width = data.sparse_width();
    m.dense_width = data.dense_width();
    m.weights.assign(params.begin(), params.begin() + static_cast<std::ptrdiff_t>(k * d));
    m.bias.assign(params.begin() + static_cast<std::ptrdiff_t>(k * d), params.end());
    m.lambda = lambda;
    m.info = std::move(info);
    return m;
}

// --- inference ---------------------------------------------------------------

std::vector<double> softmax(std::span<const double> z)
{
    std::vector<double> p(z.size());
    if (z.empty())
        return p;
    double m = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (std::size_t c = 0; c < z.size(); ++c)
        sum += (p[c] = std::exp(z[c] - m));
    for (auto& x : p)
        x /= sum;
    return p;
}

std::vector<double> scores(const LinearModel& m, const FeatureVector& x)
{
    if (x.dense.size() != m.dense_width)
        throw InputError("feature vector dense width " + std::to_string(x.dense.size()) + " differs from model's " +
                         std::to_string(m.dense_width));
    const std::size_t d = m.width();
    std::vector<double> z(m.classes.size());
    for (std::size_t k = 0; k < z.size(); ++k) {
        const double* w = m.weights.data() + k * d;
        double acc = m.bias[k];
        for (const auto& [j, v] : x.sparse) {
            if (j >= m.sparse_width)
                throw InputError("feature index " + std::to_string(j) + " beyond model width");
            acc += w[j] * v;
        }
        for (std::size_t t = 0; t < m.dense_width; ++t)
            acc += w[m.sparse_width + t] * x.dense[t];
        z[k] = acc;
    }
    return z;
}

std::vector<double> predict_proba(const LinearModel& m, const FeatureVector& x)
{
    return softmax(scores(m, x));
}

std::size_t predict(const LinearModel& m, const FeatureVector& x)
{
    auto z = scores(m, x);
    return static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
}

const std::string& predict_label(const LinearModel& m, const FeatureVector& x)
{
    return m.classes[predict(m, x)];
}

TuneResult tune_lambda(const Dataset& train_data, std::span<const FeatureVector> dev_rows,
                       std::span<const std::string> dev_labels, std::span<const double> grid,
                       const TrainOptions& options)
{
    if (grid.empty())
        throw InputError("lambda grid is empty");
    if (dev_rows.size() != dev_labels.size())
        throw InputError("dev rows and labels differ in length");
    TuneResult out;
    out.grid.assign(grid.begin(), grid.end());
    double best = -1.0;
    for (double lambda : grid) {
        LinearModel m = train(train_data, lambda, options);
        std::size_t correct = 0;
        for (std::size_t i = 0; i < dev_rows.size(); ++i)
            correct += predict_label(m, dev_rows[i]) == dev_labels[i];
        double acc = dev_rows.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(dev_rows.size());
        out.dev_accuracy.push_back(acc);
        if (acc > best || (acc == best && lambda > out.lambda)) {
            best = acc;
            out.lambda = lambda;
            out.model = std::move(m);
        }
    }
    return out;
}

MajorityModel MajorityModel::fit(std::span<const std::string> labels)
{
    if (labels.empty())
        throw DegenerateDataError("majority baseline needs at least one training label");
    std::map<std::string, std::size_t> counts;
    for (const auto& l : labels)
        ++counts[l];
    MajorityModel m;
    std::size_t best = 0;
    for (const auto& [label, count] : counts) {
        if (count > best) {
            best = count;
            m.label = label;
        }
    }
    return m;
}

// --- persistence -----------------------------------------------------------

namespace {

constexpr std::string_view kModelTag = "trollkit-linear-model v1";

std::string hex(double v)
{
    char buf[48];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

double unhex(const std::string& s)
{
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw InputError("bad number '" + s + "' in model file");
    return v;
}

std::string expect_line(std::istream& in, std::string_view key)
{
    std::string line;
    if (!std::getline(in, line))
        throw InputError("model file truncated before '" + std::string(key) + "'");
    if (line.compare(0, key.size(), key) != 0 || (line.size() > key.size() && line[key.size()] != ' ' &&
                                                  line[key.size()] != '\t'))
        throw InputError("model file: expected '" + std::string(key) + "', found '" + line + "'");
    return line.size() > key.size() ? line.substr(key.size() + 1) : std::string();
}

std::vector<double> read_numbers(std::istream& in, std::size_t count, std::string_view what)
{
    std::string line;
    if (!std::getline(in, line))
        throw InputError("model file truncated in " + std::string(what));
    std::istringstream fields(line);
    std::vector<double> out;
    std::string tok;
    while (fields >> tok)
        out.push_back(unhex(tok));
    if (out.size() != count)
        throw InputError("model file: " + std::string(what) + " has " + std::to_string(out.size()) +
                         " values, expected " + std::to_string(count));
    return out;
}

} // namespace

void save_model(std::ostream& out, const LinearModel& m)
{
    out << kModelTag << '\n';
    out << "classes";
    for (const auto& c : m.classes)
        out << '\t' << c;
    out << '\n';
    out << "sparse_width " << m.sparse_width << '\n';
    out << "dense_width " << m.dense_width << '\n';
    out << "lambda " << hex(m.lambda) << '\n';
    out << "iterations " << m.info.iterations << '\n';
    out << "objective " << hex(m.info.objective) << '\n';
    out << "gradient_norm " << hex(m.info.gradient_norm) << '\n';
    out << "converged " << (m.info.converged ? 1 : 0) << '\n';
    out << "optimizer gradient-descent armijo\n";
    const std::size_t d = m.width();
    out << "weights\n";
    for (std::size_t k = 0; k < m.classes.size(); ++k) {
        for (std::size_t j = 0; j < d; ++j)
            out << (j ? " " : "") << hex(m.weights[k * d + j]);
        out << '\n';
    }
    out << "bias\n";
    for (std::size_t k = 0; k < m.bias.size(); ++k)
        out << (k ? " " : "") << hex(m.bias[k]);
    out << '\n';
}

LinearModel load_model(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line != kModelTag)
        throw InputError("not a trollkit model file (missing version tag)");
    LinearModel m;
    {
        std::string rest = expect_line(in, "classes");
        std::istringstream fields(rest);
        std::string c;
        while (std::getline(fields, c, '\t'))
            if (!c.empty())
                m.classes.push_back(c);
        if (m.classes.size() < 2)
            throw InputError("model file lists fewer than two classes");
    }
    m.sparse_width = std::stoull(expect_line(in, "sparse_width"));
    m.dense_width = std::stoull(expect_line(in, "dense_width"));
    m.lambda = unhex(expect_line(in, "lambda"));
    m.info.iterations = std::stoull(expect_line(in, "iterations"));
    m.info.objective = unhex(expect_line(in, "objective"));
    m.info.gradient_norm = unhex(expect_line(in, "gradient_norm"));
    m.info.converged = expect_line(in, "converged") == "1";
    expect_line(in, "optimizer");
    expect_line(in, "weights");
    const std::size_t d = m.width();
    m.weights.reserve(m.classes.size() * d);
    for (std::size_t k = 0; k < m.classes.size(); ++k) {
        auto row = read_numbers(in, d, "weight row");
        m.weights.insert(m.weights.end(), row.begin(), row.end());
    }
    expect_line(in, "bias");
    m.bias = read_numbers(in, m.classes.size(), "bias");
    return m;
}

void save_model_file(const std::filesystem::path& path, const LinearModel& m)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IngestionError("cannot write model " + path.string());
    save_model(out, m);
}

LinearModel load_model_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IngestionError("cannot open model " + path.string());
    return load_model(in);
}

} // namespace trollkit
