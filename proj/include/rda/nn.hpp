#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rda {

/// Shape of a fully connected Q-network. Hidden layers use ReLU; heads are
/// linear. With `dueling` the last hidden layer feeds a scalar value head and
/// an advantage head combined as Q = V + A - mean(A).
struct NetworkSpec {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden_layers;
    std::size_t action_count = 0;
    bool dueling = true;

    /// Throws std::invalid_argument when the shape is unusable.
    void validate() const;
    std::size_t param_count() const;

    friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

/// Parameters are stored flat, layer by layer: the weight matrix (row-major,
/// out x in) followed by its bias. Heads come last: value then advantage when
/// dueling, otherwise a single action head.
class QNetwork {
public:
    QNetwork() = default;
    QNetwork(NetworkSpec spec, std::vector<double> parameters);

    const NetworkSpec& spec() const { return spec_; }
    std::span<const double> parameters() const { return parameters_; }
    std::span<double> mutable_parameters() { return parameters_; }
    std::size_t param_count() const { return parameters_.size(); }

    friend bool operator==(const QNetwork&, const QNetwork&) = default;

private:
    NetworkSpec spec_;
    std::vector<double> parameters_;
};

struct TrainTarget {
    std::vector<double> input;
    std::size_t action_index = 0;
    double target_value = 0.0;
};

/// Value and advantage outputs before the dueling combination. For a plain
/// network `value` is zero and `advantages` are the Q-values.
struct HeadOutputs {
    double value = 0.0;
    std::vector<double> advantages;
};

QNetwork init_network(const NetworkSpec& spec, std::uint64_t seed);

std::vector<double> forward(const QNetwork& net, std::span<const double> input);
HeadOutputs forward_heads(const QNetwork& net, std::span<const double> input);

/// Mean over the batch of (Q(input, action_index) - target_value)^2.
double batch_loss(const QNetwork& net, std::span<const TrainTarget> batch);

/// Gradient of batch_loss with respect to the flat parameter vector.
std::vector<double> loss_gradient(const QNetwork& net, std::span<const TrainTarget> batch);

/// One step of plain gradient descent on batch_loss.
QNetwork grad_step(QNetwork net, std::span<const TrainTarget> batch, double learning_rate);

inline QNetwork clone(const QNetwork& net) { return net; }

/// Index of the largest entry; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> values);

}  // namespace rda
