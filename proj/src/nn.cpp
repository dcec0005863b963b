#include "rda/nn.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "rda/random.hpp"

namespace rda {

void NetworkSpec::validate() const {
    if (input_dim < 1) throw std::invalid_argument("network input_dim must be >= 1");
    if (action_count < 2) throw std::invalid_argument("network action_count must be >= 2");
    if (hidden_layers.empty())
        throw std::invalid_argument("network needs at least one hidden layer");
    for (std::size_t width : hidden_layers)
        if (width < 1) throw std::invalid_argument("hidden layer width must be >= 1");
}

std::size_t NetworkSpec::param_count() const {
    std::size_t count = 0;
    std::size_t fan_in = input_dim;
    for (std::size_t width : hidden_layers) {
        count += width * fan_in + width;
        fan_in = width;
    }
    if (dueling) count += fan_in + 1;
    count += action_count * fan_in + action_count;
    return count;
}

QNetwork::QNetwork(NetworkSpec spec, std::vector<double> parameters)
    : spec_(std::move(spec)), parameters_(std::move(parameters)) {
    spec_.validate();
    if (parameters_.size() != spec_.param_count())
        throw std::invalid_argument("parameter vector has " + std::to_string(parameters_.size()) +
                                    " entries, spec implies " +
                                    std::to_string(spec_.param_count()));
    for (double p : parameters_)
        if (!std::isfinite(p)) throw std::invalid_argument("non-finite network parameter");
}

namespace {

// Dense layer y = W x + b over a slice of the flat parameter vector.
struct Dense {
    std::size_t in = 0;
    std::size_t out = 0;
    std::size_t offset = 0;  // weights start here; bias follows at offset + in*out

    std::size_t bias_offset() const { return offset + in * out; }
    std::size_t end() const { return offset + in * out + out; }

    void apply(const double* params, const double* x, double* y) const {
        const double* w = params + offset;
        const double* b = params + bias_offset();
        for (std::size_t o = 0; o < out; ++o) {
            double acc = b[o];
            const double* row = w + o * in;
            for (std::size_t i = 0; i < in; ++i) acc += row[i] * x[i];
            y[o] = acc;
        }
    }
};

struct Layout {
    std::vector<Dense> hidden;
    Dense value;  // unused unless dueling
    Dense head;   // advantage head, or Q head without dueling
    bool dueling = false;

    explicit Layout(const NetworkSpec& spec) : dueling(spec.dueling) {
        std::size_t offset = 0;
        std::size_t fan_in = spec.input_dim;
        for (std::size_t width : spec.hidden_layers) {
            hidden.push_back({fan_in, width, offset});
            offset = hidden.back().end();
            fan_in = width;
        }
        if (dueling) {
            value = {fan_in, 1, offset};
            offset = value.end();
        }
        head = {fan_in, spec.action_count, offset};
    }
};

// Activations of every hidden layer plus the head outputs for one input.
struct Trace {
    std::vector<std::vector<double>> acts;
    double value = 0.0;
    std::vector<double> head;
};

void run_forward(const Layout& layout, std::span<const double> params,
                 std::span<const double> input, Trace& trace) {
    trace.acts.resize(layout.hidden.size() + 1);
    trace.acts[0].assign(input.begin(), input.end());
    for (std::size_t l = 0; l < layout.hidden.size(); ++l) {
        const Dense& layer = layout.hidden[l];
        auto& out = trace.acts[l + 1];
        out.resize(layer.out);
        layer.apply(params.data(), trace.acts[l].data(), out.data());
        for (double& v : out) v = v > 0.0 ? v : 0.0;
    }
    const auto& last = trace.acts.back();
    trace.value = 0.0;
    if (layout.dueling) layout.value.apply(params.data(), last.data(), &trace.value);
    trace.head.resize(layout.head.out);
    layout.head.apply(params.data(), last.data(), trace.head.data());
}

std::vector<double> combine(const Layout& layout, const Trace& trace) {
    std::vector<double> q = trace.head;
    if (!layout.dueling) return q;
    double mean = 0.0;
    for (double a : trace.head) mean += a;
    mean /= static_cast<double>(trace.head.size());
    for (double& v : q) v = trace.value + v - mean;
    return q;
}

void check_input(const QNetwork& net, std::span<const double> input) {
    if (input.size() != net.spec().input_dim)
        throw std::invalid_argument("input has " + std::to_string(input.size()) +
                                    " features, network expects " +
                                    std::to_string(net.spec().input_dim));
}

void check_batch(const QNetwork& net, std::span<const TrainTarget> batch) {
    if (batch.empty()) throw std::invalid_argument("empty training batch");
    for (const auto& item : batch) {
        check_input(net, item.input);
        if (item.action_index >= net.spec().action_count)
            throw std::out_of_range("training target action index out of range");
        if (!std::isfinite(item.target_value))
            throw std::invalid_argument("non-finite training target");
    }
}

}  // namespace

QNetwork init_network(const NetworkSpec& spec, std::uint64_t seed) {
    spec.validate();
    const Layout layout(spec);
    std::vector<double> params(spec.param_count());
    Rng rng(seed, "network-init");
    auto fill = [&](const Dense& layer) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
        for (std::size_t i = layer.offset; i < layer.end(); ++i)
            params[i] = (2.0 * rng.uniform() - 1.0) * bound;
    };
    for (const auto& layer : layout.hidden) fill(layer);
    if (spec.dueling) fill(layout.value);
    fill(layout.head);
    return QNetwork(spec, std::move(params));
}

std::vector<double> forward(const QNetwork& net, std::span<const double> input) {
    check_input(net, input);
    const Layout layout(net.spec());
    Trace trace;
    run_forward(layout, net.parameters(), input, trace);
    return combine(layout, trace);
}

HeadOutputs forward_heads(const QNetwork& net, std::span<const double> input) {
    check_input(net, input);
    const Layout layout(net.spec());
    Trace trace;
    run_forward(layout, net.parameters(), input, trace);
    return {trace.value, trace.head};
}

double batch_loss(const QNetwork& net, std::span<const TrainTarget> batch) {
    check_batch(net, batch);
    const Layout layout(net.spec());
    Trace trace;
    double total = 0.0;
    for (const auto& item : batch) {
        run_forward(layout, net.parameters(), item.input, trace);
        const double err = combine(layout, trace)[item.action_index] - item.target_value;
        total += err * err;
    }
    return total / static_cast<double>(batch.size());
}

std::vector<double> loss_gradient(const QNetwork& net, std::span<const TrainTarget> batch) {
    check_batch(net, batch);
    const Layout layout(net.spec());
    const auto params = net.parameters();
    std::vector<double> grad(params.size(), 0.0);
    const std::size_t actions = net.spec().action_count;
    const double scale = 2.0 / static_cast<double>(batch.size());

    Trace trace;
    std::vector<double> g_head(actions);
    std::vector<double> g_hidden, g_prev;
    for (const auto& item : batch) {
        run_forward(layout, params, item.input, trace);
        const double err = combine(layout, trace)[item.action_index] - item.target_value;
        const double g = scale * err;

        double g_value = 0.0;
        if (layout.dueling) {
            g_value = g;
            const double share = g / static_cast<double>(actions);
            for (std::size_t k = 0; k < actions; ++k) g_head[k] = -share;
            g_head[item.action_index] += g;
        } else {
            std::fill(g_head.begin(), g_head.end(), 0.0);
            g_head[item.action_index] = g;
        }

        const auto& last = trace.acts.back();
        const std::size_t width = last.size();
        g_hidden.assign(width, 0.0);

        if (layout.dueling) {
            const Dense& v = layout.value;
            for (std::size_t i = 0; i < width; ++i) {
                grad[v.offset + i] += g_value * last[i];
                g_hidden[i] += g_value * params[v.offset + i];
            }
            grad[v.bias_offset()] += g_value;
        }
        const Dense& h = layout.head;
        for (std::size_t k = 0; k < actions; ++k) {
            if (g_head[k] == 0.0) continue;
            const std::size_t row = h.offset + k * width;
            for (std::size_t i = 0; i < width; ++i) {
                grad[row + i] += g_head[k] * last[i];
                g_hidden[i] += g_head[k] * params[row + i];
            }
            grad[h.bias_offset() + k] += g_head[k];
        }

        for (std::size_t l = layout.hidden.size(); l-- > 0;) {
            const Dense& layer = layout.hidden[l];
            const auto& out = trace.acts[l + 1];
            const auto& in = trace.acts[l];
            for (std::size_t o = 0; o < layer.out; ++o)
                if (out[o] <= 0.0) g_hidden[o] = 0.0;
            const bool need_prev = l > 0;
            if (need_prev) g_prev.assign(layer.in, 0.0);
            for (std::size_t o = 0; o < layer.out; ++o) {
                const double go = g_hidden[o];
                if (go == 0.0) continue;
                const std::size_t row = layer.offset + o * layer.in;
                for (std::size_t i = 0; i < layer.in; ++i) {
                    grad[row + i] += go * in[i];
                    if (need_prev) g_prev[i] += go * params[row + i];
                }
                grad[layer.bias_offset() + o] += go;
            }
            if (need_prev) g_hidden.swap(g_prev);
        }
    }
    return grad;
}

QNetwork grad_step(QNetwork net, std::span<const TrainTarget> batch, double learning_rate) {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
    const auto grad = loss_gradient(net, batch);
    auto params = net.mutable_parameters();
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= learning_rate * grad[i];
    return net;
}

std::size_t argmax(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("argmax of empty vector");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

}  // namespace rda
