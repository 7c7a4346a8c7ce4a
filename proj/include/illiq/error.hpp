#pragma once

// Error taxonomy shared by the library and the command-line front end.
// Every failure carries a stable machine-readable code (E_PARSE, ...) so
// scripted callers can branch on the first token of the diagnostic line.

#include <stdexcept>
#include <string>

namespace illiq {

enum class errc {
  parse,       // malformed input text (CSV cells, dates, numbers)
  schema,      // input does not match the declared schema
  calendar,    // calendar/date constraint violated
  window,      // requested window empty or outside the series range
  domain,      // argument outside the mathematical domain of an operation
  estimation,  // estimator cannot be evaluated on the given data
  degenerate,  // zero-variance or otherwise degenerate sample
  io,          // file cannot be opened, read, or written
  config       // bad run configuration
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::parse: return "E_PARSE";
    case errc::schema: return "E_SCHEMA";
    case errc::calendar: return "E_CALENDAR";
    case errc::window: return "E_WINDOW";
    case errc::domain: return "E_DOMAIN";
    case errc::estimation: return "E_ESTIMATION";
    case errc::degenerate: return "E_DEGENERATE";
    case errc::io: return "E_IO";
    case errc::config: return "E_CONFIG";
  }
  return "E_UNKNOWN";
}

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const noexcept { return code_; }
  // "E_CODE: message" — the single-line form emitted on stderr by the CLI.
  std::string tagged() const { return std::string(errc_name(code_)) + ": " + what(); }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& msg) { throw Error(code, msg); }

inline void require(bool cond, errc code, const std::string& msg) {
  if (!cond) fail(code, msg);
}

}  // namespace illiq
