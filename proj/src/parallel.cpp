#include "ehs/parallel.hpp"
#include "ehs/error.hpp"

namespace ehs {

namespace {
std::atomic<int> g_threads{1};
}

void set_default_threads(int n) { g_threads.store(n > 0 ? n : 1); }
int default_threads() { return g_threads.load(); }

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::ep_too_close: return "EpTooClose";
    case Errc::non_degenerate: return "NonDegenerate";
    case Errc::degenerate_formula: return "DegenerateFormula";
    case Errc::ambiguous_continuation: return "AmbiguousContinuation";
    case Errc::on_ehs: return "OnEhs";
    case Errc::frame_mismatch: return "FrameMismatch";
    case Errc::transition_point: return "TransitionPoint";
    case Errc::not_converged: return "NotConverged";
    case Errc::singular_overlap: return "SingularOverlap";
    case Errc::ehs_crossing: return "EhsCrossing";
    case Errc::no_convergence: return "NoConvergence";
    case Errc::cutoff_too_small: return "CutoffTooSmall";
    case Errc::step_rejected: return "StepRejected";
    case Errc::empty_support: return "EmptySupport";
    case Errc::ill_conditioned: return "IllConditioned";
    case Errc::ambiguous_log: return "AmbiguousLog";
    case Errc::residual_too_large: return "ResidualTooLarge";
    case Errc::invalid_argument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace ehs
