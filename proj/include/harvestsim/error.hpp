#pragma once

#include <stdexcept>
#include <string>

namespace harvestsim {

// Broad failure classes. The CLI maps these onto process exit codes.
enum class Errc {
  io,          // file missing / unreadable / unwritable
  parse,       // malformed CSV or config
  invalid,     // value violates a domain invariant
  no_overlap,  // traces do not share a time window
  degenerate,  // data cannot identify the requested quantity
  over_voltage,
  mismatch,    // illegal harvester / converter / environment pairing
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline const char* to_string(Errc c) {
  switch (c) {
    case Errc::io: return "io";
    case Errc::parse: return "parse";
    case Errc::invalid: return "invalid";
    case Errc::no_overlap: return "no_overlap";
    case Errc::degenerate: return "degenerate";
    case Errc::over_voltage: return "over_voltage";
    case Errc::mismatch: return "mismatch";
  }
  return "unknown";
}

}  // namespace harvestsim
