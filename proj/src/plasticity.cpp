#include "rsnn/plasticity.hpp"

#include <algorithm>
#include <stdexcept>

namespace rsnn {

void validate(const LearningConfig& cfg) {
    if (!(cfg.m_r_plus > 0.0) || !(cfg.m_p_plus > 0.0)) {
        throw std::invalid_argument("learning config: potentiation magnitudes must be positive");
    }
    if (!(cfg.m_r_minus < 0.0) || !(cfg.m_p_minus < 0.0)) {
        throw std::invalid_argument("learning config: depression magnitudes must be negative");
    }
}

OutcomeWindow::OutcomeWindow(int capacity) {
    if (capacity < 1) {
        throw std::invalid_argument("outcome window: capacity must be >= 1");
    }
    ring_.assign(capacity, 0);
}

void OutcomeWindow::push(Outcome o) {
    if (o == Outcome::Silent) return;  // silent trials never occupy a slot
    int8_t val = o == Outcome::Correct ? 1 : 0;
    if (filled_ == static_cast<int>(ring_.size())) {
        correct_ -= ring_[head_];
    } else {
        ++filled_;
    }
    ring_[head_] = val;
    correct_ += val;
    head_ = (head_ + 1) % static_cast<int>(ring_.size());
}

double OutcomeWindow::a_r() const {
    return static_cast<double>(incorrect_count()) / static_cast<double>(ring_.size());
}

double OutcomeWindow::a_p() const {
    return static_cast<double>(correct_) / static_cast<double>(ring_.size());
}

double rstdp_delta(double w, bool pre_not_after_post, Signal signal, double a_r, double a_p,
                   const LearningConfig& cfg) {
    if (signal == Signal::None) {
        throw std::invalid_argument("rstdp_delta: called without a reward or punishment signal");
    }
    // under reward only the reward term survives, under punishment only the
    // punishment term, so the dead branch is never evaluated
    double gamma;
    if (signal == Signal::Reward) {
        gamma = a_r * (pre_not_after_post ? cfg.m_r_plus : cfg.m_r_minus);
    } else {
        gamma = a_p * (pre_not_after_post ? cfg.m_p_minus : cfg.m_p_plus);
    }
    return gamma * w * (1.0 - w);
}

double stdp_delta(double w, bool pre_not_after_post, double a_plus, double a_minus) {
    return (pre_not_after_post ? a_plus : a_minus) * w * (1.0 - w);
}

std::optional<WinnerPos> select_winner(const S2Activity& activity) {
    std::optional<WinnerPos> best;
    for (int l = 0; l < activity.lattices; ++l) {
        for (int r = 0; r < activity.rows; ++r) {
            for (int c = 0; c < activity.cols; ++c) {
                int t = activity.time_at(l, r, c);
                if (t == 0) continue;
                double pot = activity.potential_at(l, r, c);
                // earlier wins; equal times prefer the higher potential; the
                // scan order itself settles exact (time, potential) ties
                if (!best || t < best->time || (t == best->time && pot > best->potential)) {
                    best = WinnerPos{l, r, c, t, pot};
                }
            }
        }
    }
    return best;
}

void apply_update(SynapseTensor& tensor, const WinnerPos& winner, const SpikeRaster& pre,
                  Signal signal, double a_r, double a_p, const LearningConfig& cfg) {
    int w = tensor.w;
    for (int m = 0; m < pre.maps; ++m) {
        for (int dr = 0; dr < w; ++dr) {
            for (int dc = 0; dc < w; ++dc) {
                int t_pre = pre.at(m, winner.row + dr, winner.col + dc);
                // absent afferents take the same branch as late ones
                bool causal = t_pre != 0 && t_pre <= winner.time;
                double& wt = tensor.at(m, dr, dc);
                wt = std::min(1.0, std::max(0.0, wt + rstdp_delta(wt, causal, signal, a_r, a_p, cfg)));
            }
        }
    }
}

FeatureKind parse_feature_kind(const std::string& name) {
    if (name == "first-spike") return FeatureKind::FirstSpike;
    if (name == "count") return FeatureKind::SpikeCount;
    if (name == "potential") return FeatureKind::MaxPotential;
    throw std::invalid_argument("unknown feature kind '" + name +
                                "' (expected first-spike|count|potential)");
}

std::vector<double> extract_features(const S2Activity& activity, FeatureKind kind) {
    std::vector<double> out(activity.lattices, 0.0);
    switch (kind) {
        case FeatureKind::FirstSpike: {
            auto winner = select_winner(activity);
            if (winner) out[winner->lattice] = 1.0;
            break;
        }
        case FeatureKind::SpikeCount: {
            for (int l = 0; l < activity.lattices; ++l) {
                int count = 0;
                for (int r = 0; r < activity.rows; ++r) {
                    for (int c = 0; c < activity.cols; ++c) {
                        if (activity.time_at(l, r, c) != 0) ++count;
                    }
                }
                out[l] = count;
            }
            break;
        }
        case FeatureKind::MaxPotential: {
            for (int l = 0; l < activity.lattices; ++l) {
                double m = 0.0;
                bool first = true;
                for (int r = 0; r < activity.rows; ++r) {
                    for (int c = 0; c < activity.cols; ++c) {
                        double p = activity.potential_at(l, r, c);
                        if (first || p > m) m = p;
                        first = false;
                    }
                }
                out[l] = m;
            }
            break;
        }
    }
    return out;
}

}  // namespace rsnn
