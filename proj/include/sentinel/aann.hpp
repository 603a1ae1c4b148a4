#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "sentinel/domain.hpp"

namespace sentinel {

/// Five-layer autoassociative network: input p, mapping layer h = 2p,
/// bottleneck b = max(1, ceil(p/2)), demapping layer h, output p.
/// Hidden activations are tanh, the output layer is linear.
struct AannModel {
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;
    std::size_t bottleneck_dim = 0;

    /// weights[l] has shape (units_out x units_in); biases[l] has units_out.
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;

    std::uint64_t seed = 0;
    std::size_t epochs_run = 0;
    double final_loss = 0.0;

    std::size_t layer_count() const { return weights.size(); }
};

struct LossHistory {
    std::vector<double> train;
    std::vector<double> validation;
    std::size_t best_epoch = 0;
    double best_validation = 0.0;
    /// Row indices (into the training matrix) held out from gradient updates.
    /// Downstream calibration uses these rows so that region boundaries are
    /// not fitted on residuals the network already minimized.
    std::vector<std::size_t> validation_rows;
};

AannModel init_aann(std::size_t input_dim, std::uint64_t seed);

/// Extracts the valid rows of a sample matrix as an Eigen matrix
/// (rows = samples).
Eigen::MatrixXd valid_rows_matrix(const SampleMatrix& matrix);

/// Trains on standardized samples (rows = samples). A seeded shuffle holds
/// out the trailing validation_fraction of rows; mini-batch gradient descent
/// with momentum minimizes mean squared reconstruction error, and the model
/// keeps the weights of the best validation epoch.
LossHistory train_aann(AannModel& model, const Eigen::MatrixXd& samples,
                       const TrainSettings& settings);

Eigen::VectorXd reconstruct(const AannModel& model, const Eigen::VectorXd& input);
Eigen::MatrixXd reconstruct_batch(const AannModel& model, const Eigen::MatrixXd& samples);

/// residual = input - reconstruction, row-wise (rows = samples).
Eigen::MatrixXd residuals(const AannModel& model, const Eigen::MatrixXd& samples);

/// SampleMatrix variant: valid rows carry residuals, invalid cells propagate.
SampleMatrix residuals(const AannModel& model, const SampleMatrix& matrix);

/// Compares the analytic gradient of the reconstruction loss at one sample
/// against central finite differences over every weight and bias. Returns
/// max over parameters of |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
/// flip_sign_layer >= 0 negates that layer's analytic weight gradient first,
/// letting a test confirm the check trips on a corrupted backprop.
double gradient_check(const AannModel& model, const Eigen::VectorXd& sample,
                      double epsilon = 1e-5, int flip_sign_layer = -1);

} // namespace sentinel
