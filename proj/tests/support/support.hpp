#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nomwyv/pipeline.hpp"

namespace nwt {

// Absolute path of a file under tests/corpus.
std::string corpusPath(const std::string& rel);
std::string readCorpus(const std::string& rel);

// Header conventions of corpus files.
bool usesPrelude(const std::string& text);
std::optional<int> expectedExit(const std::string& text);

// Accepted programs under tests/corpus, relative names, sorted.
std::vector<std::string> acceptedPrograms();
std::vector<std::string> rejectedPrograms();

// A session with the file loaded, plus the prelude when the header asks for it.
nomwyv::Session sessionFor(const std::string& rel, nomwyv::PipelineOptions opts = {});

struct Compiled {
  nomwyv::Status status = nomwyv::Status::Ok;
  nomwyv::Compiled c;
  std::vector<nomwyv::Diagnostic> diags;
  std::string rendered() const { return nomwyv::render(diags); }
};

Compiled compileCorpus(const std::string& rel, nomwyv::Session::Stage upTo = nomwyv::Session::Stage::Typecheck);
Compiled compileSource(const std::string& text, nomwyv::Session::Stage upTo = nomwyv::Session::Stage::Typecheck,
                       bool withPrelude = false);

// Parses a type or aborts the test binary.
nomwyv::Type ty(const std::string& text);

nomwyv::Ctx ctxOf(const nomwyv::Compiled& c, const nomwyv::VarEnv& gamma = {});

}  // namespace nwt
