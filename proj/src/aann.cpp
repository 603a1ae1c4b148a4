#include "sentinel/aann.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sentinel/errors.hpp"
#include "sentinel/rng.hpp"

namespace sentinel {

namespace {

struct Forward {
    // Columns are samples. a[0] is the input; a[4] the linear output.
    std::vector<Eigen::MatrixXd> a;
};

Forward forward_pass(const AannModel& model, const Eigen::MatrixXd& inputs_cols) {
    Forward f;
    f.a.resize(model.layer_count() + 1);
    f.a[0] = inputs_cols;
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        Eigen::MatrixXd z = (model.weights[l] * f.a[l]).colwise() + model.biases[l];
        f.a[l + 1] = (l + 1 < model.layer_count()) ? z.array().tanh().matrix() : z;
    }
    return f;
}

double batch_loss(const AannModel& model, const Eigen::MatrixXd& inputs_cols) {
    Forward f = forward_pass(model, inputs_cols);
    double n = static_cast<double>(inputs_cols.cols()) * static_cast<double>(inputs_cols.rows());
    return (f.a.back() - inputs_cols).squaredNorm() / n;
}

struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

Gradients backward_pass(const AannModel& model, const Forward& f) {
    const std::size_t layers = model.layer_count();
    const Eigen::MatrixXd& x = f.a[0];
    double n = static_cast<double>(x.cols()) * static_cast<double>(x.rows());

    Gradients g;
    g.weights.resize(layers);
    g.biases.resize(layers);

    Eigen::MatrixXd delta = (2.0 / n) * (f.a[layers] - x);
    for (std::size_t l = layers; l-- > 0;) {
        g.weights[l] = delta * f.a[l].transpose();
        g.biases[l] = delta.rowwise().sum();
        if (l > 0) {
            delta = model.weights[l].transpose() * delta;
            delta = delta.cwiseProduct(
                (1.0 - f.a[l].array().square()).matrix());
        }
    }
    return g;
}

} // namespace

AannModel init_aann(std::size_t input_dim, std::uint64_t seed) {
    require_data(input_dim >= 2, "autoencoder needs an input width of at least 2");

    AannModel model;
    model.input_dim = input_dim;
    model.hidden_dim = 2 * input_dim;
    model.bottleneck_dim = std::max<std::size_t>(1, (input_dim + 1) / 2);
    model.seed = seed;

    const std::size_t dims[5] = {input_dim, model.hidden_dim, model.bottleneck_dim,
                                 model.hidden_dim, input_dim};
    Rng rng(seed);
    for (std::size_t l = 0; l < 4; ++l) {
        const std::size_t fan_in = dims[l];
        const std::size_t fan_out = dims[l + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Eigen::MatrixXd w(fan_out, fan_in);
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c)
                w(r, c) = (2.0 * rng.uniform() - 1.0) * limit;
        model.weights.push_back(std::move(w));
        model.biases.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(fan_out)));
    }
    return model;
}

Eigen::MatrixXd valid_rows_matrix(const SampleMatrix& matrix) {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < matrix.rows(); ++r)
        if (matrix.row_valid(r)) rows.push_back(r);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(matrix.cols()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t c = 0; c < matrix.cols(); ++c)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
                matrix.at(rows[i], c);
    return out;
}

LossHistory train_aann(AannModel& model, const Eigen::MatrixXd& samples,
                       const TrainSettings& settings) {
    const std::size_t p = model.input_dim;
    require_data(static_cast<std::size_t>(samples.cols()) == p,
                 "training matrix width does not match the model input width");
    const std::size_t n = static_cast<std::size_t>(samples.rows());
    require_data(n >= 10 * p, "training needs at least 10 rows per input dimension, got " +
                                  std::to_string(n));
    require_data(settings.batch_size >= 1, "batch size must be >= 1");
    require_data(settings.learning_rate > 0.0, "learning rate must be > 0");
    require_data(settings.validation_fraction > 0.0 && settings.validation_fraction < 0.5,
                 "validation fraction must lie in (0, 0.5)");
    require_data(settings.patience >= 1, "early-stop patience must be >= 1");
    require_data(settings.lr_halve_every >= 1, "learning-rate halving period must be >= 1");
    require_data(settings.momentum >= 0.0 && settings.momentum < 1.0,
                 "momentum must lie in [0, 1)");
    require_data(samples.allFinite(), "training matrix contains non-finite values");
    require_data(settings.epochs >= 0, "epoch count must be >= 0");

    const auto epochs = static_cast<std::size_t>(settings.epochs);
    const auto batch_size = static_cast<std::size_t>(settings.batch_size);
    const auto patience = static_cast<std::size_t>(settings.patience);
    const auto lr_halve_every = static_cast<std::size_t>(settings.lr_halve_every);

    LossHistory history;
    if (epochs == 0) return history;

    Rng rng(settings.seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    const std::size_t n_val =
        std::max<std::size_t>(1, static_cast<std::size_t>(
                                     static_cast<double>(n) * settings.validation_fraction));
    const std::size_t n_train = n - n_val;
    require_data(n_train >= 1, "no training rows left after the validation split");
    history.validation_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                                   order.end());
    std::sort(history.validation_rows.begin(), history.validation_rows.end());

    auto gather = [&](std::size_t offset, std::size_t count) {
        Eigen::MatrixXd cols(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(count));
        for (std::size_t i = 0; i < count; ++i)
            cols.col(static_cast<Eigen::Index>(i)) =
                samples.row(static_cast<Eigen::Index>(order[offset + i])).transpose();
        return cols;
    };
    Eigen::MatrixXd train_cols = gather(0, n_train);
    Eigen::MatrixXd val_cols = gather(n_train, n_val);

    std::vector<Eigen::MatrixXd> vel_w;
    std::vector<Eigen::VectorXd> vel_b;
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        vel_w.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
        vel_b.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
    }

    std::vector<Eigen::MatrixXd> best_w = model.weights;
    std::vector<Eigen::VectorXd> best_b = model.biases;
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t best_epoch = 0;
    std::size_t since_best = 0;

    std::vector<std::size_t> batch_order(n_train);
    std::iota(batch_order.begin(), batch_order.end(), 0);

    std::size_t epoch = 0;
    for (; epoch < epochs; ++epoch) {
        const double lr =
            settings.learning_rate * std::pow(0.5, static_cast<double>(epoch / lr_halve_every));
        rng.shuffle(batch_order);

        for (std::size_t start = 0; start < n_train; start += batch_size) {
            const std::size_t count = std::min(batch_size, n_train - start);
            Eigen::MatrixXd batch(static_cast<Eigen::Index>(p),
                                  static_cast<Eigen::Index>(count));
            for (std::size_t i = 0; i < count; ++i)
                batch.col(static_cast<Eigen::Index>(i)) =
                    train_cols.col(static_cast<Eigen::Index>(batch_order[start + i]));

            Forward f = forward_pass(model, batch);
            Gradients g = backward_pass(model, f);
            for (std::size_t l = 0; l < model.layer_count(); ++l) {
                vel_w[l] = settings.momentum * vel_w[l] - lr * g.weights[l];
                vel_b[l] = settings.momentum * vel_b[l] - lr * g.biases[l];
                model.weights[l] += vel_w[l];
                model.biases[l] += vel_b[l];
            }
        }

        const double train_loss = batch_loss(model, train_cols);
        const double val_loss = batch_loss(model, val_cols);
        if (!std::isfinite(train_loss) || !std::isfinite(val_loss))
            throw_data("training diverged (non-finite loss); try a smaller learning rate");
        history.train.push_back(train_loss);
        history.validation.push_back(val_loss);

        if (val_loss < best_val) {
            best_val = val_loss;
            best_epoch = epoch;
            best_w = model.weights;
            best_b = model.biases;
            since_best = 0;
        } else if (++since_best >= patience) {
            ++epoch;
            break;
        }
    }

    model.weights = std::move(best_w);
    model.biases = std::move(best_b);
    model.epochs_run = epoch;
    model.final_loss = best_val;
    history.best_epoch = best_epoch;
    history.best_validation = best_val;
    return history;
}

Eigen::VectorXd reconstruct(const AannModel& model, const Eigen::VectorXd& input) {
    require_data(static_cast<std::size_t>(input.size()) == model.input_dim,
                 "input length does not match the model input width");
    require_data(input.allFinite(), "input contains non-finite values");
    Forward f = forward_pass(model, input);
    return f.a.back().col(0);
}

Eigen::MatrixXd reconstruct_batch(const AannModel& model, const Eigen::MatrixXd& samples) {
    require_data(static_cast<std::size_t>(samples.cols()) == model.input_dim,
                 "matrix width does not match the model input width");
    Forward f = forward_pass(model, samples.transpose());
    return f.a.back().transpose();
}

Eigen::MatrixXd residuals(const AannModel& model, const Eigen::MatrixXd& samples) {
    return samples - reconstruct_batch(model, samples);
}

SampleMatrix residuals(const AannModel& model, const SampleMatrix& matrix) {
    require_data(matrix.cols() == model.input_dim,
                 "matrix width does not match the model input width");
    SampleMatrix out = matrix;
    Eigen::VectorXd sample(static_cast<Eigen::Index>(matrix.cols()));
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        if (!matrix.row_valid(r)) continue;
        for (std::size_t c = 0; c < matrix.cols(); ++c)
            sample(static_cast<Eigen::Index>(c)) = matrix.at(r, c);
        Eigen::VectorXd rec = reconstruct(model, sample);
        for (std::size_t c = 0; c < matrix.cols(); ++c)
            out.at(r, c) = sample(static_cast<Eigen::Index>(c)) -
                           rec(static_cast<Eigen::Index>(c));
    }
    return out;
}

double gradient_check(const AannModel& model, const Eigen::VectorXd& sample, double epsilon,
                      int flip_sign_layer) {
    require_data(static_cast<std::size_t>(sample.size()) == model.input_dim,
                 "sample length does not match the model input width");
    require_data(epsilon > 0.0, "epsilon must be > 0");

    Forward f = forward_pass(model, sample);
    Gradients g = backward_pass(model, f);
    if (flip_sign_layer >= 0 && flip_sign_layer < static_cast<int>(model.layer_count()))
        g.weights[static_cast<std::size_t>(flip_sign_layer)] *= -1.0;

    AannModel probe = model;
    double worst = 0.0;
    auto check = [&](double& param, double analytic) {
        const double saved = param;
        param = saved + epsilon;
        const double up = batch_loss(probe, sample);
        param = saved - epsilon;
        const double down = batch_loss(probe, sample);
        param = saved;
        const double numeric = (up - down) / (2.0 * epsilon);
        const double rel = std::fabs(analytic - numeric) /
                           std::max(1e-8, std::fabs(analytic) + std::fabs(numeric));
        worst = std::max(worst, rel);
    };

    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        for (Eigen::Index r = 0; r < probe.weights[l].rows(); ++r)
            for (Eigen::Index c = 0; c < probe.weights[l].cols(); ++c)
                check(probe.weights[l](r, c), g.weights[l](r, c));
        for (Eigen::Index r = 0; r < probe.biases[l].size(); ++r)
            check(probe.biases[l](r), g.biases[l](r));
    }
    return worst;
}

} // namespace sentinel
