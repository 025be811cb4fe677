#include <gtest/gtest.h>

#include "spikekal/errors.hpp"
#include "spikekal/snn_core.hpp"
#include "support.hpp"

#include <cmath>
#include <limits>

namespace spikekal {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Largest relative deviation from exp(-t/tau) over [0, horizon] for a
// neuron started one unit above rest with no drive.
double decay_error(double dt, double horizon) {
  LifParams p;
  p.v_thresh = 10.0;
  p.dt = dt;
  NeuronState s = NeuronState::at_rest(1, p);
  s.v[0] = p.v_rest + 1.0;
  const VectorXd zero = VectorXd::Zero(1);
  double worst = 0.0;
  const int steps = static_cast<int>(std::lround(horizon / dt));
  for (int k = 1; k <= steps; ++k) {
    lif_step(s, p, zero, zero, k * dt);
    const double exact = std::exp(-k * dt / p.tau_membrane);
    worst = std::max(worst, std::abs(s.v[0] - p.v_rest - exact) / exact);
  }
  return worst;
}

int spikes_under_current(double current, double seconds) {
  LifParams p;
  NeuronState s = NeuronState::at_rest(1, p);
  const VectorXd ext = VectorXd::Constant(1, current);
  const VectorXd zero = VectorXd::Zero(1);
  int count = 0;
  const int steps = static_cast<int>(seconds / p.dt);
  for (int k = 0; k < steps; ++k) count += static_cast<int>(lif_step(s, p, ext, zero, k * p.dt)[0]);
  return count;
}

TEST(LifStep, RestIsFixedPoint) {
  LifParams p;
  NeuronState s = NeuronState::at_rest(3, p);
  const VectorXd zero = VectorXd::Zero(3);
  for (int k = 0; k < 100; ++k) EXPECT_EQ(lif_step(s, p, zero, zero, k * p.dt), zero);
  EXPECT_EQ(s.v, VectorXd::Constant(3, p.v_rest));
  EXPECT_TRUE(std::isinf(s.last_spike_time[0]));
}

TEST(LifStep, FreeDecayMatchesExponential) {
  const double tau = LifParams{}.tau_membrane;
  const double coarse = decay_error(tau / 100.0, 3.0 * tau);
  const double fine = decay_error(tau / 400.0, 3.0 * tau);
  EXPECT_LT(coarse, 0.02);
  EXPECT_LT(fine, coarse);
}

TEST(LifStep, SpikeRateIncreasesWithCurrent) {
  const int low = spikes_under_current(50.0, 1.0);
  const int mid = spikes_under_current(100.0, 1.0);
  const int high = spikes_under_current(200.0, 1.0);
  EXPECT_GT(low, 0);
  EXPECT_LT(low, mid);
  EXPECT_LT(mid, high);
}

TEST(LifStep, SpikeResetsAndRecordsTime) {
  LifParams p;
  NeuronState s = NeuronState::at_rest(1, p);
  s.v[0] = p.v_thresh - 1e-9;
  const VectorXd spikes = lif_step(s, p, VectorXd::Zero(1), VectorXd::Constant(1, 1.0), 0.25);
  EXPECT_EQ(spikes[0], 1.0);
  EXPECT_EQ(s.v[0], p.v_reset);
  EXPECT_EQ(s.last_spike_time[0], 0.25);
}

TEST(LifStep, DimensionMismatch) {
  LifParams p;
  NeuronState s = NeuronState::at_rest(2, p);
  EXPECT_THROW(lif_step(s, p, VectorXd::Zero(3), VectorXd::Zero(2), 0.0), ContractViolation);
  EXPECT_THROW(lif_step(s, p, VectorXd::Zero(2), MatrixXd::Zero(2, 3), VectorXd::Zero(2), 0.0),
               ContractViolation);
}

TEST(LifParamsTest, StabilityGuard) {
  LifParams p;
  p.dt = 0.006;
  EXPECT_THROW(p.validate(), ConfigError);
  p.dt = 0.005;
  EXPECT_NO_THROW(p.validate());
  p.v_thresh = p.v_rest;
  EXPECT_THROW(p.validate(), ConfigError);
  LifParams q;
  q.tau_input = 0.0;
  EXPECT_THROW(q.validate(), ConfigError);
}

TEST(EncodeFeatures, ZeroFeaturesZeroCurrent) {
  EXPECT_EQ(encode_features(VectorXd::Zero(4), VectorXd::Zero(2), 1000.0), VectorXd::Zero(6));
  VectorXd dx(2), dy(1);
  dx << 1.0, -2.0;
  dy << 0.5;
  VectorXd expected(3);
  expected << 10.0, -20.0, 5.0;
  EXPECT_EQ(encode_features(dx, dy, 10.0), expected);
}

TEST(NeuronCount, MatchesPaperTables) {
  static_assert(spikekal_neuron_count(4, 2) == 14);
  static_assert(spikekal_neuron_count(3, 1) == 7);
  NoiseStream stream(1);
  const auto lin = NetworkTopology::for_model(4, 2, 0.5, stream);
  EXPECT_EQ(lin.n_in, 6);
  EXPECT_EQ(lin.n_out, 8);
  EXPECT_EQ(lin.neuron_count(), 14);
  const auto lor = NetworkTopology::for_model(3, 1, 0.5, stream);
  EXPECT_EQ(lor.n_in, 4);
  EXPECT_EQ(lor.n_out, 3);
  EXPECT_EQ(lor.neuron_count(), 7);
}

TEST(NetworkTopologyTest, WeightsUniformInRange) {
  NoiseStream stream(2);
  const auto net = NetworkTopology::for_model(4, 2, 0.5, stream);
  EXPECT_GE(net.W.minCoeff(), 0.0);
  EXPECT_LE(net.W.maxCoeff(), 0.5);
  EXPECT_EQ(net.W.rows(), 8);
  EXPECT_EQ(net.W.cols(), 6);
}

TEST(NetworkForward, SilentWithoutInputAndTracesDecay) {
  LifParams p;
  NoiseStream stream(3);
  const auto net = NetworkTopology::for_model(4, 2, 0.5, stream);
  NetworkState state = NetworkState::at_rest(net, p);
  GainDecoder dec = GainDecoder::create(8, 0.005, 0.01);
  dec.trace.setConstant(1.0);
  const ForwardResult r = network_forward(net, state, p, VectorXd::Zero(6), 20, dec);
  EXPECT_EQ(r.input_spike_counts.sum(), 0.0);
  EXPECT_EQ(r.output_spike_counts.sum(), 0.0);
  EXPECT_LT(dec.trace.maxCoeff(), 1.0);
  EXPECT_GE(dec.trace.minCoeff(), 0.0);
  EXPECT_NEAR(dec.trace[0], std::exp(-20 * p.dt / 0.005), 1e-12);
}

TEST(NetworkForward, Deterministic) {
  LifParams p;
  NoiseStream stream(4);
  const auto net = NetworkTopology::for_model(4, 2, 0.5, stream);
  NetworkState a = NetworkState::at_rest(net, p), b = a;
  GainDecoder da = GainDecoder::create(8, 0.005, 0.01), db = da;
  testing::Gen gen(4);
  for (int step = 0; step < 50; ++step) {
    const VectorXd input = gen.vector(6, -500, 500);
    const ForwardResult ra = network_forward(net, a, p, input, 20, da);
    const ForwardResult rb = network_forward(net, b, p, input, 20, db);
    ASSERT_EQ(ra.output_spike_counts, rb.output_spike_counts);
    ASSERT_EQ(da.trace, db.trace);
  }
}

TEST(NetworkForwardProperty, StrongerWeightsNeverReduceOutput) {
  LifParams p;
  testing::Gen gen(5);
  for (int trial = 0; trial < 20; ++trial) {
    const MatrixXd W = gen.matrix(8, 6, 0.0, 0.5);
    NeuronState weak = NeuronState::at_rest(8, p), strong = weak;
    VectorXd weak_count = VectorXd::Zero(8), strong_count = VectorXd::Zero(8);
    const VectorXd zero = VectorXd::Zero(8);
    for (int k = 0; k < 400; ++k) {
      VectorXd pre(6);
      for (int i = 0; i < 6; ++i) pre[i] = (k + 3 * i) % (5 + i) == 0 ? 1.0 : 0.0;
      weak_count += lif_step(weak, p, zero, W, pre, k * p.dt);
      strong_count += lif_step(strong, p, zero, 2.0 * W, pre, k * p.dt);
    }
    for (int j = 0; j < 8; ++j) EXPECT_GE(strong_count[j], weak_count[j]);
  }
}

TEST(NetworkForwardProperty, TracesNonNegativeAndBoundedBySubsteps) {
  LifParams p;
  NoiseStream stream(6);
  const auto net = NetworkTopology::for_model(4, 2, 2.0, stream);
  NetworkState state = NetworkState::at_rest(net, p);
  testing::Gen gen(6);
  for (int step = 0; step < 200; ++step) {
    const int substeps = gen.integer(1, 40);
    GainDecoder dec = GainDecoder::create(8, gen.uniform(0.001, 1.0), 0.01);
    network_forward(net, state, p, gen.vector(6, -5000, 5000), substeps, dec);
    ASSERT_GE(dec.trace.minCoeff(), 0.0);
    ASSERT_LE(dec.trace.maxCoeff(), substeps);
  }
}

TEST(DecodeGain, SilentTracesGiveBias) {
  GainDecoder dec = GainDecoder::create(6, 0.005, 0.01, 3.0, 0.0);
  dec.bias << 1, 2, 3, 4, 5, 6;
  const MatrixXd K = decode_gain(dec, 3, 2).matrix();
  EXPECT_EQ(K(0, 0), 1.0);
  EXPECT_EQ(K(0, 1), 2.0);
  EXPECT_EQ(K(2, 1), 6.0);
}

TEST(DecodeGain, ZeroReadoutGainIgnoresActivity) {
  GainDecoder dec = GainDecoder::create(2, 0.005, 0.01, 0.0, 0.7);
  testing::Gen gen(7);
  for (int trial = 0; trial < 10; ++trial) {
    dec.trace = gen.vector(2, 0, 20);
    EXPECT_EQ(decode_gain(dec, 2, 1).matrix(), MatrixXd::Constant(2, 1, 0.7));
  }
}

TEST(DecoderLms, ZeroErrorNoChange) {
  GainDecoder dec = GainDecoder::create(2, 0.005, 0.1, 0.5, 0.25);
  dec.trace << 2.0, 3.0;
  const GainDecoder before = dec;
  const double err = decoder_lms_update(dec, decode_gain(dec, 2, 1));
  EXPECT_EQ(err, 0.0);
  EXPECT_EQ(dec.gain, before.gain);
  EXPECT_EQ(dec.bias, before.bias);
}

TEST(DecoderLms, SilentTraceMovesOnlyBias) {
  GainDecoder dec = GainDecoder::create(1, 0.005, 0.1);
  decoder_lms_update(dec, GainMatrix(MatrixXd::Constant(1, 1, 2.0)));
  EXPECT_EQ(dec.gain[0], 0.0);
  EXPECT_NEAR(dec.bias[0], 0.2, 1e-15);
}

TEST(DecoderLmsProperty, ConvergesMonotonicallyBelowStabilityRate) {
  testing::Gen gen(8);
  for (int trial = 0; trial < 30; ++trial) {
    const double trace = gen.uniform(0.0, 10.0);
    const double rate = gen.uniform(0.05, 0.95) / (1.0 + trace * trace);
    GainDecoder dec = GainDecoder::create(1, 0.005, rate, gen.uniform(-1, 1), gen.uniform(-1, 1));
    dec.trace[0] = trace;
    const GainMatrix target(MatrixXd::Constant(1, 1, gen.uniform(-5, 5)));
    double previous = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 200; ++k) {
      const double err = decoder_lms_update(dec, target);
      ASSERT_LE(err, previous);
      previous = err;
    }
    EXPECT_LT(std::abs(decode_gain(dec, 1, 1).matrix()(0, 0) - target.matrix()(0, 0)), 1e-3);
  }
}

}  // namespace
}  // namespace spikekal
