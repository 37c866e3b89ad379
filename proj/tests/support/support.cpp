#include "support.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace nomwyv;

namespace nwt {

std::string corpusPath(const std::string& rel) { return std::string(NOMWYV_CORPUS_DIR) + "/" + rel; }

std::string readCorpus(const std::string& rel) {
  auto text = readFile(corpusPath(rel));
  if (!text) {
    std::cerr << "missing corpus file " << rel << "\n";
    std::abort();
  }
  return *text;
}

bool usesPrelude(const std::string& text) { return text.find("// uses: prelude") != std::string::npos; }

std::optional<int> expectedExit(const std::string& text) {
  const std::string tag = "// expect: ";
  if (text.rfind(tag, 0) != 0) return std::nullopt;
  return std::atoi(text.c_str() + tag.size());
}

static std::vector<std::string> listDir(const std::string& sub) {
  std::vector<std::string> out;
  fs::path dir = fs::path(NOMWYV_CORPUS_DIR) / sub;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".nwyv")
      out.push_back(sub.empty() ? e.path().filename().string() : sub + "/" + e.path().filename().string());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> acceptedPrograms() { return listDir(""); }
std::vector<std::string> rejectedPrograms() { return listDir("reject"); }

Session sessionFor(const std::string& rel, PipelineOptions opts) {
  Session s;
  s.options = opts;
  std::string text = readCorpus(rel);
  if (usesPrelude(text)) s.loadPrelude(corpusPath("lib/prelude.nwyv"));
  s.loadSource(corpusPath(rel), text);
  return s;
}

Compiled compileCorpus(const std::string& rel, Session::Stage upTo) {
  Session s = sessionFor(rel);
  Compiled out;
  out.status = s.compile(upTo, out.c, out.diags);
  return out;
}

Compiled compileSource(const std::string& text, Session::Stage upTo, bool withPrelude) {
  Session s;
  if (withPrelude) s.loadPrelude(corpusPath("lib/prelude.nwyv"));
  s.loadSource("<test>", text);
  Compiled out;
  out.status = s.compile(upTo, out.c, out.diags);
  return out;
}

Type ty(const std::string& text) {
  std::vector<Diagnostic> diags;
  auto t = parseType(text, &diags);
  if (!t) {
    std::cerr << "bad type in test: " << text << "\n" << render(diags);
    std::abort();
  }
  return *t;
}

Ctx ctxOf(const nomwyv::Compiled& c, const VarEnv& gamma) {
  Ctx ctx = makeCtx(c.contexts);
  for (const auto& [x, t] : gamma) ctx = ctx.push(x, t);
  return ctx;
}

}  // namespace nwt
