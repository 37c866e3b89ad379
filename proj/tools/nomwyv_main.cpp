// nomwyv: command-line driver over the shared library.
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "nomwyv/nomwyv.h"

namespace {

struct Options {
  bool noExpand = false;
  unsigned avoidFuel = 16;
  bool trace = false;
  std::string prelude;
  std::string format = "text";
};

bool useColor() {
  const char* env = std::getenv("NOMWYV_COLOR");
  std::string v = env ? env : "auto";
  if (v == "always") return true;
  if (v == "never") return false;
  return isatty(STDERR_FILENO) != 0;
}

struct Result {
  int status = 0;
  std::string out;
  std::string err;
};

class Session {
 public:
  explicit Session(const Options& o) : s_(nomwyv_session_create()) {
    nomwyv_set_expansion(s_, o.noExpand ? 0 : 1);
    nomwyv_set_avoid_fuel(s_, o.avoidFuel);
    nomwyv_set_trace(s_, o.trace ? 1 : 0);
    nomwyv_set_color(s_, useColor() ? 1 : 0);
    nomwyv_format f = NOMWYV_FORMAT_TEXT;
    if (o.format == "json") f = NOMWYV_FORMAT_JSON;
    if (o.format == "dot") f = NOMWYV_FORMAT_DOT;
    nomwyv_set_format(s_, f);
    if (!o.prelude.empty()) preludeStatus_ = nomwyv_load_prelude(s_, o.prelude.c_str());
  }
  ~Session() { nomwyv_session_destroy(s_); }
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  nomwyv_session* get() { return s_; }

  // Applies f unless loading already failed, then collects the buffers.
  template <class F>
  Result run(F f) {
    int st = preludeStatus_;
    if (st == NOMWYV_OK) st = f(s_);
    return Result{st, nomwyv_output(s_), nomwyv_diagnostics(s_)};
  }

 private:
  nomwyv_session* s_;
  int preludeStatus_ = NOMWYV_OK;
};

int emit(const Result& r) {
  std::fputs(r.out.c_str(), stdout);
  std::fputs(r.err.c_str(), stderr);
  return r.status;
}

Result checkOne(const Options& o, const std::string& path) {
  Session s(o);
  return s.run([&](nomwyv_session* h) {
    int st = nomwyv_load_file(h, path.c_str());
    return st == NOMWYV_OK ? static_cast<int>(nomwyv_check(h)) : st;
  });
}

int checkDir(const Options& o, const std::string& dir) {
  std::vector<std::string> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".nwyv") files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  std::vector<Result> results(files.size());
  std::vector<std::thread> workers;
  unsigned width = std::max(1u, std::thread::hardware_concurrency());
  for (std::size_t start = 0; start < files.size(); start += width) {
    for (std::size_t i = start; i < std::min(files.size(), start + width); ++i)
      workers.emplace_back([&, i] { results[i] = checkOne(o, files[i]); });
    for (auto& w : workers) w.join();
    workers.clear();
  }
  int status = 0;
  for (std::size_t i = 0; i < files.size(); ++i) {
    std::printf("%s: %s\n", files[i].c_str(), nomwyv_status_name(static_cast<nomwyv_status>(results[i].status)));
    emit(Result{0, results[i].out, results[i].err});
    if (status == 0) status = results[i].status;
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nominal Wyvern reference checker and interpreter"};
  app.require_subcommand(1);
  Options o;
  app.add_flag("--no-expand", o.noExpand, "Decide asserts and subtype queries without the expansion pre-pass");
  app.add_option("--avoid-fuel", o.avoidFuel, "Unfolding budget for avoidance")->capture_default_str();
  app.add_flag("--trace,--explain", o.trace, "Show derivation attempts for failed subtype checks");
  app.add_option("--prelude", o.prelude, "Declarations loaded before the input");
  app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"text", "dot", "json"}))->capture_default_str();

  std::string file;
  auto* check = app.add_subcommand("check", "Parse, separate and typecheck a program or a directory of programs");
  check->add_option("file", file, "Program file or directory")->required();

  std::string lhs, rhs;
  auto* subtype = app.add_subcommand("subtype", "Answer one subtyping query (exit 0 true, 5 false)");
  subtype->add_option("--lhs", lhs, "Subtype")->required();
  subtype->add_option("--rhs", rhs, "Supertype")->required();
  subtype->add_option("file", file, "Program supplying declarations");

  std::int64_t fuel = -1;
  bool noFuel = false;
  auto* run = app.add_subcommand("run", "Typecheck and evaluate main");
  run->add_option("file", file, "Program file")->required();
  auto* fuelOpt = run->add_option("--fuel", fuel, "Evaluation fuel");
  auto* noFuelOpt = run->add_flag("--no-fuel", noFuel, "Evaluate without a fuel bound");
  fuelOpt->excludes(noFuelOpt);

  std::string kind = "sdg";
  auto* graph = app.add_subcommand("graph", "Emit a dependency graph");
  graph->add_option("file", file, "Program file")->required();
  graph->add_option("--kind", kind, "Graph kind")->check(CLI::IsMember({"sdg", "nominal"}))->capture_default_str();

  std::uint64_t seed = 0, cases = 1000;
  auto* fuzz = app.add_subcommand("fuzz", "Cross-check the subtype engine against the bounded oracle");
  fuzz->add_option("--seed", seed, "Generator seed")->capture_default_str();
  fuzz->add_option("--cases", cases, "Number of generated queries")->capture_default_str();

  for (auto* sub : {check, subtype, run, graph, fuzz}) sub->fallthrough();
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return NOMWYV_USAGE;
  }

  if (check->parsed()) {
    if (std::filesystem::is_directory(file)) return checkDir(o, file);
    return emit(checkOne(o, file));
  }
  Session s(o);
  if (subtype->parsed())
    return emit(s.run([&](nomwyv_session* h) {
      if (!file.empty()) {
        int st = nomwyv_load_file(h, file.c_str());
        if (st != NOMWYV_OK) return st;
      }
      return static_cast<int>(nomwyv_subtype(h, lhs.c_str(), rhs.c_str()));
    }));
  if (run->parsed()) {
    if (fuelOpt->count() == 0 && !noFuel) {
      std::fputs("run: --fuel N is required unless --no-fuel is given\n", stderr);
      return NOMWYV_USAGE;
    }
    return emit(s.run([&](nomwyv_session* h) {
      int st = nomwyv_load_file(h, file.c_str());
      return st == NOMWYV_OK ? static_cast<int>(nomwyv_run(h, noFuel ? -1 : fuel)) : st;
    }));
  }
  if (graph->parsed())
    return emit(s.run([&](nomwyv_session* h) {
      int st = nomwyv_load_file(h, file.c_str());
      if (st != NOMWYV_OK) return st;
      return static_cast<int>(nomwyv_graph(h, kind == "nominal" ? NOMWYV_GRAPH_NOMINAL : NOMWYV_GRAPH_SDG));
    }));
  if (fuzz->parsed()) return emit(s.run([&](nomwyv_session* h) { return static_cast<int>(nomwyv_fuzz(h, seed, cases)); }));
  return NOMWYV_USAGE;
}
