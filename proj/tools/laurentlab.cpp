// Command-line front end: scripts, a repl, and the verification suite.
// Talks to the engine exclusively through the C API.
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "laurentlab.h"

namespace {

struct SessionDeleter {
  void operator()(ll_session* s) const { ll_session_free(s); }
};
using SessionPtr = std::unique_ptr<ll_session, SessionDeleter>;

int emit(ll_session* s, const std::string& text, bool record) {
  char* out = nullptr;
  int status = ll_exec(s, text.c_str(), record ? 1 : 0, &out);
  if (out) {
    std::cout << out;
    ll_string_free(out);
  }
  if (status == LL_INTERNAL) {
    std::cerr << "internal error: " << ll_session_error(s) << "\n";
    status = LL_BAD_INPUT;
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"truncated iterated Laurent series workbench"};
  app.require_subcommand(1);

  std::string format = "text";
  unsigned long long seed = 20260823ULL;
  long long prec = 8;
  app.add_option("--format", format, "output format")
      ->check(CLI::IsMember({"text", "record"}));
  app.add_option("--seed", seed, "seed for the verify command");
  app.add_option("--prec", prec,
                 "default per-variable precision bound (default 8)");

  std::string script_path;
  auto* run = app.add_subcommand("run", "execute a script file");
  run->add_option("script", script_path, "script file path")->required();

  auto* repl = app.add_subcommand("repl", "interactive statement loop");

  int count = 0;
  std::string mutation = "none";
  auto* verify = app.add_subcommand("verify", "run the verification suite");
  verify->add_option("--count", count, "instances per sub-suite");
  verify->add_option("--mutation", mutation,
                     "inject a catalogued bug: none, wedge_sign_flip, "
                     "residue_index_off_by_one, drop_nil_tail");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  SessionPtr session(ll_session_new());
  if (!session) {
    std::cerr << "failed to create a session\n";
    return 2;
  }
  ll_session_set_seed(session.get(), seed);
  ll_session_set_prec(session.get(), prec);
  bool record = format == "record";

  if (run->parsed()) {
    std::ifstream in(script_path);
    if (!in) {
      std::cerr << "cannot open " << script_path << "\n";
      return 2;
    }
    std::ostringstream text;
    text << in.rdbuf();
    return emit(session.get(), text.str(), record);
  }

  if (repl->parsed()) {
    int worst = 0;
    std::string line;
    bool tty = isatty(0);
    if (tty) std::cout << "> " << std::flush;
    while (std::getline(std::cin, line)) {
      worst = std::max(worst, emit(session.get(), line, record));
      if (tty) std::cout << "> " << std::flush;
    }
    if (tty) std::cout << "\n";
    return worst;
  }

  // verify
  char* report = nullptr;
  int status = ll_verify(session.get(), seed, count,
                         mutation == "none" ? "" : mutation.c_str(), &report);
  if (report) {
    std::cout << report;
    ll_string_free(report);
  }
  if (status == LL_INTERNAL) {
    std::cerr << "internal error: " << ll_session_error(session.get()) << "\n";
    status = 2;
  }
  return status;
}
