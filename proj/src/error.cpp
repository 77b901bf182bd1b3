#include "trimdr/error.hpp"

namespace trimdr {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Precondition: return "Precondition";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::DegenerateTrim: return "DegenerateTrim";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::Separation: return "Separation";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::WeakInstrument: return "WeakInstrument";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace trimdr
