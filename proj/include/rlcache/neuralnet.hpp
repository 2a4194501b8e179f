#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "rlcache/rng.hpp"
#include "rlcache/types.hpp"

namespace rlcache {

// One training sample: loss is computed only on the output selected by
// `action`; the rest of the target vector is ignored.
struct TrainSample {
    std::vector<double> input;
    double target = 0.0;
    std::size_t action = 0;
};

// Feed-forward network with sigmoid hidden layers and a linear output layer.
class Network {
public:
    // sizes = [in, hidden..., out]; weights drawn uniform in
    // +-sqrt(6/(fan_in+fan_out)), biases zero. Init is a pure function of the
    // seed.
    Network(std::vector<std::size_t> sizes, std::uint64_t seed);

    const std::vector<std::size_t>& sizes() const { return sizes_; }
    std::size_t input_size() const { return sizes_.front(); }
    std::size_t output_size() const { return sizes_.back(); }
    std::size_t num_layers() const { return weights_.size(); }
    std::size_t num_parameters() const;

    std::vector<double> forward(std::span<const double> input) const;

    // Flat parameter access, layer by layer, weights then biases.
    double get_parameter(std::size_t i) const;
    void set_parameter(std::size_t i, double v);

    void save(const std::filesystem::path& path) const;
    static Network load(const std::filesystem::path& path);

    friend void copy_parameters(const Network& src, Network& dst);
    friend class Trainer;

private:
    std::vector<std::size_t> sizes_;
    // weights_[l] is row-major [sizes_[l+1] x sizes_[l]].
    std::vector<std::vector<double>> weights_;
    std::vector<std::vector<double>> biases_;
};

// dst gets an exact copy of src's parameters; shapes must match.
void copy_parameters(const Network& src, Network& dst);

struct AdamParams {
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Huber-loss trainer with an Adam optimizer; owns moment buffers shaped like
// the network parameters.
class Trainer {
public:
    Trainer(const Network& net, AdamParams params = {}, double huber_delta = 1.0);

    // Mean masked Huber loss over the batch, no parameter change.
    double batch_loss(const Network& net, std::span<const TrainSample> batch) const;

    // Analytic gradients of batch_loss with respect to every parameter, in
    // the same flat order as Network::get_parameter.
    std::vector<double> gradients(const Network& net,
                                  std::span<const TrainSample> batch) const;

    // One Adam step on the batch; returns the pre-step mean loss.
    double train_batch(Network& net, std::span<const TrainSample> batch);

    std::uint64_t steps() const { return step_; }
    const AdamParams& params() const { return adam_; }

private:
    AdamParams adam_;
    double huber_delta_;
    std::uint64_t step_ = 0;
    std::vector<double> m_, v_;  // flat first/second moments
};

}  // namespace rlcache
