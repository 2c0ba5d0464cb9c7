#pragma once

#include <memory>
#include <string>
#include <vector>

#include "verify.hpp"

namespace laurent::dsl {

using rings::RingPtr;
using series::Series;

/// Coefficient-ring literal: `Z`, `Q`, `Z/4`, `Q[e]/(e^3)`, products joined
/// with `*`. Inverse of Ring::name().
RingPtr parse_ring_literal(const std::string& text);

/// Canonical value text with a `ring`/`vars` header; deserialize is the
/// parse-inverse and throws FormatError on malformed input.
std::string serialize(const Series& f);
Series deserialize(const std::string& text);

struct Output {
  std::string kind;  // print / check / invert / residue / verify / error
  std::string text;  // one logical output, possibly multi-line
};

struct RunResult {
  std::vector<Output> outputs;
  /// 0 success, 1 failed check or domain error, 2 syntax/type/usage error.
  int exit_code = 0;
};

/// `--format {text,record}` rendering of a run.
std::string render(const RunResult& result, bool record);

/// Stateful script interpreter. Declarations and let-bindings persist
/// across run() calls, so the repl can feed statements one at a time.
class Session {
 public:
  Session();
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  /// Parses and executes a script fragment (newline/';'-separated
  /// statements). Never throws on malformed input; errors become outputs
  /// with a nonzero exit code.
  RunResult run(const std::string& text);

  /// Default seed for the `verify` command (CLI --seed).
  void set_seed(unsigned long long seed);

  /// Default per-variable precision bound used when a command carries no
  /// `prec` clause (CLI --prec); initially 8.
  void set_default_prec(long long bound);

 private:
  struct Interp;
  std::unique_ptr<Interp> imp_;
};

}  // namespace laurent::dsl
