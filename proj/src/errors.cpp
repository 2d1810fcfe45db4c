#include "stochlab/errors.hpp"

namespace stochlab {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::ok: return "ok";
    case Errc::negative_weight: return "NegativeWeight";
    case Errc::all_zero: return "AllZero";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::space_mismatch: return "SpaceMismatch";
    case Errc::unknown_element: return "UnknownElement";
    case Errc::malformed_product_space: return "MalformedProductSpace";
    case Errc::non_stochastic_table: return "NonStochasticTable";
    case Errc::non_convergent_stationary: return "NonConvergentStationary";
    case Errc::horizon_too_large: return "HorizonTooLarge";
    case Errc::vocab_mismatch: return "VocabMismatch";
    case Errc::non_finite_input: return "NonFiniteInput";
    case Errc::non_finite_gradient: return "NonFiniteGradient";
    case Errc::no_draft_head: return "NoDraftHead";
    case Errc::diverged_loss: return "DivergedLoss";
    case Errc::boundary_simplex: return "BoundarySimplex";
    case Errc::unknown_kind: return "UnknownKind";
    case Errc::infinite_average: return "InfiniteAverage";
    case Errc::config_invalid: return "ConfigInvalid";
    case Errc::io_failure: return "IoFailure";
    case Errc::internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace stochlab
