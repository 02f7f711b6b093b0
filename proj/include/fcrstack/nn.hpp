#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fcrstack/csv.hpp"
#include "fcrstack/errors.hpp"
#include "fcrstack/rng.hpp"

namespace fcrstack {

// Dense rectifier network with a linear output head, flat parameter storage
// and hand-written backprop. Double precision: the problem is tiny and exact
// finite-difference checks stay meaningful.
class MlpQNet {
public:
    MlpQNet(int input_dim, int output_dim, std::vector<int> hidden, std::uint64_t seed)
        : input_dim_(input_dim), output_dim_(output_dim), hidden_(std::move(hidden)) {
        if (input_dim_ <= 0 || output_dim_ <= 0)
            throw ValidationError("qnet: dimensions must be positive");
        for (int h : hidden_)
            if (h <= 0) throw ValidationError("qnet: hidden sizes must be positive");

        int in = input_dim_;
        for (int h : hidden_) {
            layers_.push_back({in, h});
            in = h;
        }
        layers_.push_back({in, output_dim_});

        std::size_t count = 0;
        for (const Layer& l : layers_) count += static_cast<std::size_t>(l.in) * l.out + l.out;
        params_.resize(count);

        std::mt19937_64 rng = make_rng(seed, 0x0e7);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::size_t off = 0;
        for (const Layer& l : layers_) {
            const double scale = std::sqrt(2.0 / l.in);
            for (int i = 0; i < l.in * l.out; ++i) params_[off + i] = scale * gauss(rng);
            off += static_cast<std::size_t>(l.in) * l.out;
            for (int i = 0; i < l.out; ++i) params_[off + i] = 0.0;
            off += static_cast<std::size_t>(l.out);
        }
    }

    int input_dim() const { return input_dim_; }
    int output_dim() const { return output_dim_; }
    const std::vector<int>& hidden() const { return hidden_; }
    std::size_t param_count() const { return params_.size(); }
    const std::vector<double>& parameters() const { return params_; }
    std::vector<double>& parameters() { return params_; }

    struct Workspace {
        std::vector<std::vector<double>> act; // act[0] = input, act.back() = q-values
    };

    void forward(const double* x, Workspace& ws) const {
        ws.act.resize(layers_.size() + 1);
        ws.act[0].assign(x, x + input_dim_);
        std::size_t off = 0;
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            const Layer& layer = layers_[l];
            const double* w = params_.data() + off;
            const double* b = w + static_cast<std::size_t>(layer.in) * layer.out;
            const std::vector<double>& in = ws.act[l];
            std::vector<double>& out = ws.act[l + 1];
            out.assign(static_cast<std::size_t>(layer.out), 0.0);
            for (int o = 0; o < layer.out; ++o) {
                const double* wrow = w + static_cast<std::size_t>(o) * layer.in;
                double z = b[o];
                for (int i = 0; i < layer.in; ++i) z += wrow[i] * in[static_cast<std::size_t>(i)];
                const bool last = l + 1 == layers_.size();
                out[static_cast<std::size_t>(o)] = last ? z : std::max(0.0, z);
            }
            off += static_cast<std::size_t>(layer.in) * layer.out + layer.out;
        }
    }

    std::vector<double> q_values(const double* x) const {
        Workspace ws;
        forward(x, ws);
        return ws.act.back();
    }

    // Accumulates dLoss/dParams into `grad` for the sample held in `ws`.
    // `dq` is dLoss/dQ at the output layer.
    void backward(const Workspace& ws, const std::vector<double>& dq,
                  std::vector<double>& grad) const {
        if (grad.size() != params_.size())
            throw ValidationError("qnet: gradient buffer size mismatch");
        std::vector<double> delta = dq;
        // Offsets of each layer's weight block.
        std::vector<std::size_t> offsets(layers_.size());
        std::size_t off = 0;
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            offsets[l] = off;
            off += static_cast<std::size_t>(layers_[l].in) * layers_[l].out + layers_[l].out;
        }
        for (std::size_t li = layers_.size(); li-- > 0;) {
            const Layer& layer = layers_[li];
            const std::vector<double>& in = ws.act[li];
            double* gw = grad.data() + offsets[li];
            double* gb = gw + static_cast<std::size_t>(layer.in) * layer.out;
            const double* w = params_.data() + offsets[li];
            std::vector<double> prev(static_cast<std::size_t>(layer.in), 0.0);
            for (int o = 0; o < layer.out; ++o) {
                const double d = delta[static_cast<std::size_t>(o)];
                if (d == 0.0) continue;
                double* gwrow = gw + static_cast<std::size_t>(o) * layer.in;
                const double* wrow = w + static_cast<std::size_t>(o) * layer.in;
                for (int i = 0; i < layer.in; ++i) {
                    gwrow[i] += d * in[static_cast<std::size_t>(i)];
                    prev[static_cast<std::size_t>(i)] += d * wrow[i];
                }
                gb[o] += d;
            }
            if (li > 0) {
                // Rectifier gate of the preceding layer: a zero activation
                // means a closed unit.
                for (std::size_t i = 0; i < prev.size(); ++i)
                    if (ws.act[li][i] <= 0.0) prev[i] = 0.0;
                delta = std::move(prev);
            }
        }
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw ValidationError("cannot write checkpoint: " + path);
        out << "fcrstack-qnet v1\n";
        out << "input " << input_dim_ << "\n";
        out << "output " << output_dim_ << "\n";
        out << "hidden";
        for (int h : hidden_) out << ' ' << h;
        out << "\n";
        out << "params " << params_.size() << "\n";
        for (double p : params_) out << format_double(p) << "\n";
        if (!out) throw SimulationError("checkpoint write failed: " + path);
    }

    static MlpQNet load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ValidationError("cannot open checkpoint: " + path);
        std::string line;
        if (!std::getline(in, line) || line != "fcrstack-qnet v1")
            throw ParseError(path + ": not a checkpoint file (bad header)");
        int input = 0, output = 0;
        std::size_t count = 0;
        std::vector<int> hidden;
        {
            std::string word;
            if (!(in >> word >> input) || word != "input")
                throw ParseError(path + ": malformed input line");
            if (!(in >> word >> output) || word != "output")
                throw ParseError(path + ": malformed output line");
            if (!(in >> word) || word != "hidden") throw ParseError(path + ": malformed hidden line");
            std::getline(in, line);
            std::stringstream hs(line);
            int h;
            while (hs >> h) hidden.push_back(h);
            if (!(in >> word >> count) || word != "params")
                throw ParseError(path + ": malformed params line");
        }
        MlpQNet net(input, output, hidden, 0);
        if (net.param_count() != count)
            throw ParseError(path + ": parameter count does not match architecture");
        for (std::size_t i = 0; i < count; ++i)
            if (!(in >> net.params_[i])) throw ParseError(path + ": truncated parameter list");
        return net;
    }

private:
    struct Layer {
        int in;
        int out;
    };

    int input_dim_;
    int output_dim_;
    std::vector<int> hidden_;
    std::vector<Layer> layers_;
    std::vector<double> params_;
};

inline double huber_loss(double diff, double delta) {
    const double a = std::abs(diff);
    return a <= delta ? 0.5 * diff * diff : delta * (a - 0.5 * delta);
}

inline double huber_grad(double diff, double delta) { return std::clamp(diff, -delta, delta); }

// Adaptive moment estimation over a flat parameter vector.
class AdamOptimizer {
public:
    AdamOptimizer(std::size_t n, double lr, double beta1 = 0.9, double beta2 = 0.999,
                  double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

    void step(std::vector<double>& params, const std::vector<double>& grad) {
        if (params.size() != m_.size() || grad.size() != m_.size())
            throw ValidationError("adam: size mismatch");
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, t_);
        const double bc2 = 1.0 - std::pow(beta2_, t_);
        for (std::size_t i = 0; i < params.size(); ++i) {
            m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
            v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
            const double mhat = m_[i] / bc1;
            const double vhat = v_[i] / bc2;
            params[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }

    double learning_rate() const { return lr_; }

private:
    double lr_, beta1_, beta2_, eps_;
    std::int64_t t_ = 0;
    std::vector<double> m_, v_;
};

} // namespace fcrstack
