#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "rda/nn.hpp"
#include "rda/random.hpp"

namespace {

using rda::NetworkSpec;
using rda::QNetwork;
using rda::TrainTarget;

std::vector<double> random_vector(rda::Rng& rng, std::size_t n, double scale = 1.0) {
    std::vector<double> v(n);
    for (double& x : v) x = scale * (2.0 * rng.uniform() - 1.0);
    return v;
}

TEST(NetworkSpec, ParamCountMatchesHandCount) {
    // 12->32: 12*32+32 = 416; 32->32: 1056; value head 33; advantage head 4*32+4 = 132.
    const NetworkSpec spec{12, {32, 32}, 4, true};
    EXPECT_EQ(spec.param_count(), 416u + 1056u + 33u + 132u);
    EXPECT_EQ(spec.param_count(), 1637u);
    EXPECT_EQ(rda::init_network(spec, 0).param_count(), 1637u);
    const NetworkSpec plain{12, {32, 32}, 4, false};
    EXPECT_EQ(plain.param_count(), 1637u - 33u);
}

TEST(NetworkSpec, RejectsUnusableShapes) {
    EXPECT_THROW((NetworkSpec{4, {}, 2, true}.validate()), std::invalid_argument);
    EXPECT_THROW((NetworkSpec{0, {8}, 2, true}.validate()), std::invalid_argument);
    EXPECT_THROW((NetworkSpec{4, {8}, 1, true}.validate()), std::invalid_argument);
    EXPECT_THROW((NetworkSpec{4, {8, 0}, 2, true}.validate()), std::invalid_argument);
    EXPECT_THROW(rda::init_network({4, {}, 2, true}, 7), std::invalid_argument);
}

TEST(QNetwork, RejectsWrongCountOrNonFinite) {
    const NetworkSpec spec{2, {2}, 2, false};
    EXPECT_THROW(QNetwork(spec, std::vector<double>(3, 0.0)), std::invalid_argument);
    std::vector<double> p(spec.param_count(), 0.0);
    p[1] = std::nan("");
    EXPECT_THROW(QNetwork(spec, p), std::invalid_argument);
}

TEST(InitNetwork, DeterministicPerSeed) {
    const NetworkSpec spec{4, {8}, 2, true};
    const auto a = rda::init_network(spec, 7), b = rda::init_network(spec, 7);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, rda::init_network(spec, 8));
}

TEST(InitNetwork, WeightsWithinFanInBound) {
    const NetworkSpec spec{16, {9}, 3, false};
    const auto net = rda::init_network(spec, 1);
    const auto p = net.parameters();
    // First layer fan-in 16, head fan-in 9.
    for (std::size_t i = 0; i < 16 * 9 + 9; ++i) EXPECT_LE(std::abs(p[i]), 0.25);
    for (std::size_t i = 16 * 9 + 9; i < p.size(); ++i) EXPECT_LE(std::abs(p[i]), 1.0 / 3.0);
}

TEST(Forward, ZeroParametersGiveEqualQValues) {
    const NetworkSpec spec{5, {6, 4}, 3, true};
    const QNetwork net(spec, std::vector<double>(spec.param_count(), 0.0));
    const auto q = rda::forward(net, std::vector<double>{1, -2, 3, 0.5, 9});
    for (double v : q) EXPECT_EQ(v, q[0]);
}

TEST(Forward, MatchesReferenceImplementation) {
    rda::Rng rng(11, "test");
    for (bool dueling : {true, false}) {
        for (int trial = 0; trial < 10; ++trial) {
            const NetworkSpec spec{7, {9, 5}, 4, dueling};
            const auto net = rda::init_network(spec, static_cast<std::uint64_t>(trial));
            const auto x = random_vector(rng, 7, 2.0);
            const auto got = rda::forward(net, x);
            const auto want = oracle::forward(net, x);
            ASSERT_EQ(got.size(), want.size());
            for (std::size_t a = 0; a < got.size(); ++a) EXPECT_NEAR(got[a], want[a], 1e-12);
        }
    }
}

TEST(Forward, PureAcrossCalls) {
    const auto net = rda::init_network({3, {4}, 2, true}, 2);
    const std::vector<double> x{0.1, 0.2, 0.3};
    EXPECT_EQ(rda::forward(net, x), rda::forward(net, x));
}

TEST(Forward, DimensionMismatchThrows) {
    const auto net = rda::init_network({3, {4}, 2, true}, 2);
    EXPECT_THROW(rda::forward(net, std::vector<double>{1, 2}), std::invalid_argument);
}

TEST(Forward, DuelingIgnoresConstantAdvantageShift) {
    // The advantage-head biases are the last action_count parameters; adding c
    // to each shifts every advantage pre-output by c.
    rda::Rng rng(4, "test");
    const NetworkSpec spec{6, {8}, 5, true};
    for (double c : {-3.0, 0.5, 10.0}) {
        const auto net = rda::init_network(spec, 9);
        QNetwork shifted = net;
        auto p = shifted.mutable_parameters();
        for (std::size_t a = 0; a < spec.action_count; ++a) p[p.size() - 1 - a] += c;
        const auto x = random_vector(rng, 6);
        const auto heads = rda::forward_heads(net, x);
        const auto heads_shifted = rda::forward_heads(shifted, x);
        for (std::size_t a = 0; a < spec.action_count; ++a)
            EXPECT_NEAR(heads_shifted.advantages[a], heads.advantages[a] + c, 1e-12);
        const auto q = rda::forward(net, x), qs = rda::forward(shifted, x);
        for (std::size_t a = 0; a < q.size(); ++a) EXPECT_NEAR(q[a], qs[a], 1e-12);
    }
}

TEST(GradStep, MatchesFiniteDifferences) {
    rda::Rng rng(2024, "gradcheck");
    int instances = 0;
    for (int trial = 0; trial < 24; ++trial) {
        const bool dueling = trial % 2 == 0;
        const NetworkSpec spec{5, {7, 6}, 3, dueling};
        const auto net = rda::init_network(spec, static_cast<std::uint64_t>(100 + trial));
        std::vector<TrainTarget> batch;
        for (int i = 0; i < 4; ++i)
            batch.push_back({random_vector(rng, 5, 1.5), rng.uniform_int(3), 2.0 * rng.uniform() - 1.0});
        const auto grad = rda::loss_gradient(net, batch);
        EXPECT_LE(oracle::max_relative_gradient_error(net, batch, grad, 1e-5), 1e-4) << "trial " << trial;
        ++instances;
    }
    EXPECT_GE(instances, 20);
}

TEST(GradStep, LossMatchesReference) {
    rda::Rng rng(5, "test");
    const auto net = rda::init_network({4, {6}, 3, true}, 5);
    std::vector<TrainTarget> batch;
    for (int i = 0; i < 5; ++i) batch.push_back({random_vector(rng, 4), rng.uniform_int(3), rng.uniform()});
    EXPECT_NEAR(rda::batch_loss(net, batch), oracle::loss(net, batch), 1e-12);
}

TEST(GradStep, ZeroErrorLeavesParametersUnchanged) {
    const auto net = rda::init_network({4, {6}, 3, true}, 3);
    std::vector<TrainTarget> batch;
    for (std::size_t a = 0; a < 3; ++a) {
        std::vector<double> x{0.5, -1.0, 0.25, static_cast<double>(a)};
        batch.push_back({x, a, rda::forward(net, x)[a]});
    }
    EXPECT_EQ(rda::grad_step(net, batch, 0.1), net);
}

TEST(GradStep, SmallStepDecreasesLoss) {
    rda::Rng rng(8, "test");
    for (int trial = 0; trial < 10; ++trial) {
        const auto net = rda::init_network({3, {5}, 2, trial % 2 == 0}, static_cast<std::uint64_t>(trial));
        const std::vector<TrainTarget> batch{{random_vector(rng, 3), rng.uniform_int(2), 3.0 * rng.uniform()}};
        const double before = rda::batch_loss(net, batch);
        const double after = rda::batch_loss(rda::grad_step(net, batch, 1e-3), batch);
        EXPECT_LE(after, before);
    }
}

TEST(GradStep, RejectsBadArguments) {
    const auto net = rda::init_network({2, {3}, 2, true}, 1);
    const std::vector<TrainTarget> ok{{{1.0, 0.0}, 0, 1.0}};
    EXPECT_THROW(rda::grad_step(net, {}, 0.1), std::invalid_argument);
    EXPECT_THROW(rda::grad_step(net, ok, 0.0), std::invalid_argument);
    EXPECT_THROW(rda::grad_step(net, ok, -1.0), std::invalid_argument);
    const std::vector<TrainTarget> inf{{{1.0, 0.0}, 0, INFINITY}};
    EXPECT_THROW(rda::grad_step(net, inf, 0.1), std::invalid_argument);
    const std::vector<TrainTarget> bad_action{{{1.0, 0.0}, 2, 1.0}};
    EXPECT_THROW(rda::grad_step(net, bad_action, 0.1), std::out_of_range);
}

TEST(Clone, IndependentCopy) {
    const auto net = rda::init_network({2, {3}, 2, true}, 1);
    const auto copy = rda::clone(net);
    const std::vector<TrainTarget> batch{{{1.0, -1.0}, 1, 5.0}};
    const auto stepped = rda::grad_step(copy, batch, 0.1);
    EXPECT_NE(stepped, net);
    EXPECT_EQ(copy, net);
    EXPECT_EQ(rda::clone(rda::clone(net)), net);
    EXPECT_EQ(rda::forward(copy, std::vector<double>{0.3, 0.7}), rda::forward(net, std::vector<double>{0.3, 0.7}));
}

TEST(Argmax, TiesGoToLowestIndex) {
    EXPECT_EQ(rda::argmax(std::vector<double>{0.5, 0.5}), 0u);
    EXPECT_EQ(rda::argmax(std::vector<double>{0.1, 0.9, 0.9}), 1u);
    EXPECT_THROW(rda::argmax(std::vector<double>{}), std::invalid_argument);
}

TEST(Argmax, InvariantUnderPositiveScaling) {
    rda::Rng rng(6, "test");
    for (int t = 0; t < 200; ++t) {
        auto v = random_vector(rng, 5);
        const auto base = rda::argmax(v);
        const double c = 0.01 + 100.0 * rng.uniform();
        for (double& x : v) x *= c;
        EXPECT_EQ(rda::argmax(v), base);
    }
}

}  // namespace
