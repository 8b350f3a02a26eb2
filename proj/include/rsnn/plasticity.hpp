#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rsnn/network.hpp"

namespace rsnn {

enum class Outcome { Correct, Incorrect, Silent };
enum class Signal { Reward, Punish, None };

// Reward / punishment learning magnitudes. The reward pair potentiates
// causal synapses and depresses the rest; the punishment pair inverts that.
struct LearningConfig {
    double m_r_plus = 0.04;
    double m_r_minus = -0.025;
    double m_p_plus = 0.01;
    double m_p_minus = -0.005;
};

// Throws std::invalid_argument unless m_r_plus > 0, m_p_plus > 0,
// m_r_minus < 0, m_p_minus < 0.
void validate(const LearningConfig& cfg);

// Sliding window over the last N labeled trial outcomes. Silent trials are
// not pushed and never occupy a slot. The adjustment factors divide by the
// capacity, so they ramp up from zero while the window fills.
class OutcomeWindow {
public:
    explicit OutcomeWindow(int capacity);

    void push(Outcome o);  // Outcome::Silent is a no-op

    double a_r() const;  // incorrect / capacity
    double a_p() const;  // correct / capacity

    int correct_count() const { return correct_; }
    int incorrect_count() const { return filled_ - correct_; }
    int capacity() const { return static_cast<int>(ring_.size()); }

private:
    std::vector<int8_t> ring_;  // 1 = correct, 0 = incorrect
    int head_ = 0;
    int filled_ = 0;
    int correct_ = 0;
};

// Reward-modulated weight step for a single synapse. pre_not_after_post is
// true when the afferent spiked at or before the post spike; synapses whose
// afferent spiked later or not at all take the opposite branch. The factor
// w*(1-w) keeps every step inside [0, 1] and freezes saturated weights.
// Throws std::invalid_argument on Signal::None.
double rstdp_delta(double w, bool pre_not_after_post, Signal signal, double a_r, double a_p,
                   const LearningConfig& cfg);

// Unmodulated counterpart used by the unsupervised baseline.
double stdp_delta(double w, bool pre_not_after_post, double a_plus = 0.004,
                  double a_minus = -0.003);

struct WinnerPos {
    int lattice = 0, row = 0, col = 0;
    int time = 0;
    double potential = 0.0;
};

// Earliest fired neuron across all lattices; ties prefer the higher final
// potential, then ascending (lattice, row, col). nullopt when nothing fired.
std::optional<WinnerPos> select_winner(const S2Activity& activity);

// Winner-take-all update of one lattice's shared weights: every synapse of
// the winner's receptive field steps by rstdp_delta against the afferent
// spike times, clamped to [0, 1].
void apply_update(SynapseTensor& tensor, const WinnerPos& winner, const SpikeRaster& pre,
                  Signal signal, double a_r, double a_p, const LearningConfig& cfg);

enum class FeatureKind { FirstSpike, SpikeCount, MaxPotential };

FeatureKind parse_feature_kind(const std::string& name);

// Per-lattice descriptor vectors for the readout baselines: one-hot of the
// lattice holding the globally earliest spike, fired-neuron counts, or
// maximum final potentials.
std::vector<double> extract_features(const S2Activity& activity, FeatureKind kind);

}  // namespace rsnn
