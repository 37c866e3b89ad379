#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nomwyv/diagnostics.hpp"
#include "nomwyv/eval.hpp"
#include "nomwyv/graphs.hpp"
#include "nomwyv/parser.hpp"
#include "nomwyv/typecheck.hpp"

namespace nomwyv {

enum class Status : int {
  Ok = 0,
  TypeError = 1,
  Separation = 2,
  Parse = 3,
  Stuck = 4,
  AssertFailed = 5,
  Usage = 64,
  Io = 66,
  Internal = 70,
};

enum class OutputFormat { Text, Dot, Json };
enum class GraphKind { Sdg, Nominal };

struct PipelineOptions {
  bool expansion = true;  // asserts and subtype queries only; typing always expands
  int avoidFuel = kDefaultAvoidFuel;
  bool trace = false;
  OutputFormat format = OutputFormat::Text;
};

struct Outcome {
  Status status = Status::Ok;
  std::string output;
  std::vector<Diagnostic> diagnostics;
};

// The static pipeline up to a given stage, shared by every command.
struct Compiled {
  Program program;  // prelude declarations first, desugared
  std::vector<AssertDirective> asserts;
  Contexts contexts;
  std::optional<CheckedProgram> checked;
};

class Session {
 public:
  PipelineOptions options;

  bool loadPrelude(const std::string& path, std::string* err = nullptr);
  bool loadFile(const std::string& path, std::string* err = nullptr);
  void loadSource(const std::string& name, const std::string& text);
  void setPreludeSource(const std::string& name, const std::string& text);

  Outcome check();
  Outcome subtype(const std::string& lhs, const std::string& rhs);
  Outcome run(std::optional<std::uint64_t> fuel);
  Outcome graph(GraphKind kind);
  Outcome fuzz(std::uint64_t seed, std::uint64_t cases);

  // Exposed for tests: stops after the named stage.
  enum class Stage { Parse, Resolve, Separation, Typecheck };
  Status compile(Stage upTo, Compiled& out, std::vector<Diagnostic>& diags);

 private:
  std::optional<SourceFile> prelude_;
  std::optional<SourceFile> file_;
};

// Reads a whole file; nullopt when it cannot be opened.
std::optional<std::string> readFile(const std::string& path);

std::string diagnosticsToJson(const std::vector<Diagnostic>& ds);
std::string outcomeToJson(const Outcome& o);

}  // namespace nomwyv
