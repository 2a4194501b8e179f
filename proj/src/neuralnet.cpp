#include "rlcache/neuralnet.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace rlcache {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

Network::Network(std::vector<std::size_t> sizes, std::uint64_t seed)
    : sizes_(std::move(sizes)) {
    if (sizes_.size() < 2) throw SimError("network needs at least input and output sizes");
    for (const std::size_t s : sizes_)
        if (s == 0) throw SimError("network layer sizes must be positive");
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        const std::size_t fan_in = sizes_[l];
        const std::size_t fan_out = sizes_[l + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::vector<double> w(fan_in * fan_out);
        for (double& x : w) x = rng.uniform(-limit, limit);
        weights_.push_back(std::move(w));
        biases_.emplace_back(fan_out, 0.0);
    }
}

std::size_t Network::num_parameters() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l)
        n += weights_[l].size() + biases_[l].size();
    return n;
}

std::vector<double> Network::forward(std::span<const double> input) const {
    if (input.size() != sizes_.front())
        throw SimError("forward: input length " + std::to_string(input.size()) +
                       " != " + std::to_string(sizes_.front()));
    std::vector<double> act(input.begin(), input.end());
    std::vector<double> next;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        const std::size_t in = sizes_[l], out = sizes_[l + 1];
        next.assign(out, 0.0);
        const double* w = weights_[l].data();
        for (std::size_t o = 0; o < out; ++o) {
            double z = biases_[l][o];
            const double* row = w + o * in;
            for (std::size_t i = 0; i < in; ++i) z += row[i] * act[i];
            next[o] = (l + 1 == weights_.size()) ? z : sigmoid(z);
        }
        act.swap(next);
    }
    return act;
}

double Network::get_parameter(std::size_t i) const {
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        if (i < weights_[l].size()) return weights_[l][i];
        i -= weights_[l].size();
        if (i < biases_[l].size()) return biases_[l][i];
        i -= biases_[l].size();
    }
    throw SimError("parameter index out of range");
}

void Network::set_parameter(std::size_t i, double v) {
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        if (i < weights_[l].size()) {
            weights_[l][i] = v;
            return;
        }
        i -= weights_[l].size();
        if (i < biases_[l].size()) {
            biases_[l][i] = v;
            return;
        }
        i -= biases_[l].size();
    }
    throw SimError("parameter index out of range");
}

void copy_parameters(const Network& src, Network& dst) {
    if (src.sizes_ != dst.sizes_) throw SimError("copy_parameters: shape mismatch");
    dst.weights_ = src.weights_;
    dst.biases_ = src.biases_;
}

void Network::save(const std::filesystem::path& path) const {
    nlohmann::json j;
    j["layer_sizes"] = sizes_;
    auto& layers = j["layers"] = nlohmann::json::array();
    for (std::size_t l = 0; l < weights_.size(); ++l)
        layers.push_back({{"w", weights_[l]}, {"b", biases_[l]}});
    std::ofstream out(path);
    if (!out) throw SimError("cannot open " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw SimError("failed writing " + path.string());
}

Network Network::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SimError("cannot open " + path.string());
    nlohmann::json j;
    in >> j;
    Network net(j.at("layer_sizes").get<std::vector<std::size_t>>(), 0);
    const auto& layers = j.at("layers");
    if (layers.size() != net.weights_.size())
        throw SimError("checkpoint layer count mismatch in " + path.string());
    for (std::size_t l = 0; l < net.weights_.size(); ++l) {
        const auto w = layers[l].at("w").get<std::vector<double>>();
        const auto b = layers[l].at("b").get<std::vector<double>>();
        if (w.size() != net.weights_[l].size() || b.size() != net.biases_[l].size())
            throw SimError("checkpoint shape mismatch in " + path.string());
        net.weights_[l] = w;
        net.biases_[l] = b;
    }
    return net;
}

Trainer::Trainer(const Network& net, AdamParams params, double huber_delta)
    : adam_(params), huber_delta_(huber_delta) {
    m_.assign(net.num_parameters(), 0.0);
    v_.assign(net.num_parameters(), 0.0);
}

namespace {

double huber(double err, double delta) {
    const double a = std::abs(err);
    if (a <= delta) return 0.5 * err * err;
    return delta * (a - 0.5 * delta);
}

double huber_grad(double err, double delta) {
    if (err > delta) return delta;
    if (err < -delta) return -delta;
    return err;
}

}  // namespace

double Trainer::batch_loss(const Network& net, std::span<const TrainSample> batch) const {
    if (batch.empty()) throw SimError("empty training batch");
    double total = 0.0;
    for (const TrainSample& s : batch) {
        const auto out = net.forward(s.input);
        total += huber(out.at(s.action) - s.target, huber_delta_);
    }
    const double loss = total / static_cast<double>(batch.size());
    if (!std::isfinite(loss)) throw SimError("non-finite training loss");
    return loss;
}

std::vector<double> Trainer::gradients(const Network& net,
                                       std::span<const TrainSample> batch) const {
    if (batch.empty()) throw SimError("empty training batch");
    const auto& sizes = net.sizes_;
    const std::size_t layers = net.weights_.size();

    std::vector<std::vector<double>> grad_w(layers), grad_b(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        grad_w[l].assign(net.weights_[l].size(), 0.0);
        grad_b[l].assign(net.biases_[l].size(), 0.0);
    }

    std::vector<std::vector<double>> acts(layers + 1);
    std::vector<double> delta, delta_prev;
    const double inv_batch = 1.0 / static_cast<double>(batch.size());

    for (const TrainSample& s : batch) {
        // Forward pass keeping every activation.
        if (s.input.size() != sizes.front()) throw SimError("train: input length mismatch");
        acts[0].assign(s.input.begin(), s.input.end());
        for (std::size_t l = 0; l < layers; ++l) {
            const std::size_t in = sizes[l], out = sizes[l + 1];
            acts[l + 1].assign(out, 0.0);
            const double* w = net.weights_[l].data();
            for (std::size_t o = 0; o < out; ++o) {
                double z = net.biases_[l][o];
                const double* row = w + o * in;
                for (std::size_t i = 0; i < in; ++i) z += row[i] * acts[l][i];
                acts[l + 1][o] = (l + 1 == layers) ? z : sigmoid(z);
            }
        }

        // Output delta: masked Huber derivative on the taken action.
        const std::size_t out_n = sizes.back();
        delta.assign(out_n, 0.0);
        const double err = acts[layers].at(s.action) - s.target;
        delta[s.action] = huber_grad(err, huber_delta_) * inv_batch;

        for (std::size_t l = layers; l-- > 0;) {
            const std::size_t in = sizes[l], out = sizes[l + 1];
            double* gw = grad_w[l].data();
            const double* a_in = acts[l].data();
            for (std::size_t o = 0; o < out; ++o) {
                const double d = delta[o];
                if (d == 0.0) continue;
                grad_b[l][o] += d;
                double* row = gw + o * in;
                for (std::size_t i = 0; i < in; ++i) row[i] += d * a_in[i];
            }
            if (l == 0) break;
            delta_prev.assign(in, 0.0);
            const double* w = net.weights_[l].data();
            for (std::size_t o = 0; o < out; ++o) {
                const double d = delta[o];
                if (d == 0.0) continue;
                const double* row = w + o * in;
                for (std::size_t i = 0; i < in; ++i) delta_prev[i] += d * row[i];
            }
            // Sigmoid derivative of the producing layer.
            for (std::size_t i = 0; i < in; ++i) {
                const double a = acts[l][i];
                delta_prev[i] *= a * (1.0 - a);
            }
            delta.swap(delta_prev);
        }
    }

    std::vector<double> flat;
    flat.reserve(net.num_parameters());
    for (std::size_t l = 0; l < layers; ++l) {
        flat.insert(flat.end(), grad_w[l].begin(), grad_w[l].end());
        flat.insert(flat.end(), grad_b[l].begin(), grad_b[l].end());
    }
    return flat;
}

double Trainer::train_batch(Network& net, std::span<const TrainSample> batch) {
    const double loss = batch_loss(net, batch);
    const std::vector<double> g = gradients(net, batch);
    if (g.size() != m_.size()) throw SimError("trainer bound to a different architecture");

    ++step_;
    const double bc1 = 1.0 - std::pow(adam_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(adam_.beta2, static_cast<double>(step_));
    std::size_t idx = 0;
    for (std::size_t l = 0; l < net.weights_.size(); ++l) {
        auto step_span = [&](std::vector<double>& params) {
            for (double& p : params) {
                const double grad = g[idx];
                m_[idx] = adam_.beta1 * m_[idx] + (1.0 - adam_.beta1) * grad;
                v_[idx] = adam_.beta2 * v_[idx] + (1.0 - adam_.beta2) * grad * grad;
                const double m_hat = m_[idx] / bc1;
                const double v_hat = v_[idx] / bc2;
                p -= adam_.learning_rate * m_hat / (std::sqrt(v_hat) + adam_.epsilon);
                ++idx;
            }
        };
        step_span(net.weights_[l]);
        step_span(net.biases_[l]);
    }
    return loss;
}

}  // namespace rlcache
