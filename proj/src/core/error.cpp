#include "qathermo/error.hpp"

namespace qathermo {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::domain: return "domain";
    case Errc::saturation: return "saturation";
    case Errc::size: return "size";
    case Errc::parity: return "parity";
    case Errc::range: return "range";
    case Errc::mismatch: return "mismatch";
    case Errc::parse: return "parse";
    case Errc::io: return "io";
    case Errc::extrapolation: return "extrapolation";
    case Errc::infeasible: return "infeasible";
    case Errc::insufficient_points: return "insufficient_points";
    case Errc::degenerate_abscissa: return "degenerate_abscissa";
    case Errc::empty_group: return "empty_group";
    case Errc::not_found: return "not_found";
    case Errc::bipartite: return "bipartite";
    case Errc::negative_temperature: return "negative_temperature";
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::buffer_too_small: return "buffer_too_small";
  }
  return "unknown";
}

}  // namespace qathermo
