#include "nomwyv/pipeline.hpp"

#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "nomwyv/oracle.hpp"
#include "nomwyv/subtype.hpp"

namespace nomwyv {

std::optional<std::string> readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool Session::loadPrelude(const std::string& path, std::string* err) {
  auto text = readFile(path);
  if (!text) {
    if (err) *err = "cannot read prelude '" + path + "'";
    return false;
  }
  prelude_ = SourceFile{path, *text};
  return true;
}

bool Session::loadFile(const std::string& path, std::string* err) {
  auto text = readFile(path);
  if (!text) {
    if (err) *err = "cannot read '" + path + "'";
    return false;
  }
  file_ = SourceFile{path, *text};
  return true;
}

void Session::loadSource(const std::string& name, const std::string& text) { file_ = SourceFile{name, text}; }
void Session::setPreludeSource(const std::string& name, const std::string& text) { prelude_ = SourceFile{name, text}; }

namespace {

std::string fileName(const std::optional<SourceFile>& f) { return f ? f->path : std::string("<input>"); }

std::string separationCode(ViolationKind k) {
  switch (k) {
    case ViolationKind::ShapeInLowerBound: return "E0201";
    case ViolationKind::ShapeUpperNotShape: return "E0202";
    case ViolationKind::ShapeRefinedInRefinement: return "E0203";
    case ViolationKind::UnguardedCycle: return "E0204";
  }
  return "E0299";
}

// Best-effort position for an "N::t" location.
SourceSpan spanOf(const Program& p, const std::string& loc) {
  auto sep = loc.find("::");
  std::string n = loc.substr(0, sep);
  for (const auto& d : p.decls) {
    if (d.kind != TopDecl::Kind::Named || d.name != n) continue;
    if (sep != std::string::npos)
      for (const auto& m : d.members)
        if (m.label == loc.substr(sep + 2)) return m.span;
    return d.span;
  }
  return {};
}

void appendTypeErrors(const std::vector<TypeError>& es, const std::string& file, bool trace,
                      std::vector<Diagnostic>& out) {
  for (const auto& e : es) out.push_back(toDiagnostic(e, file, trace));
}

}  // namespace

Status Session::compile(Stage upTo, Compiled& out, std::vector<Diagnostic>& diags) {
  std::string file = fileName(file_);
  Program merged;
  if (prelude_) {
    ParseResult pr = parseDeclarations(*prelude_);
    diags.insert(diags.end(), pr.diagnostics.begin(), pr.diagnostics.end());
    merged.decls = pr.program.decls;
    out.asserts = pr.asserts;
  }
  if (file_) {
    ParseResult fr = parseProgram(*file_);
    diags.insert(diags.end(), fr.diagnostics.begin(), fr.diagnostics.end());
    merged.decls.insert(merged.decls.end(), fr.program.decls.begin(), fr.program.decls.end());
    merged.main = fr.program.main;
    out.asserts.insert(out.asserts.end(), fr.asserts.begin(), fr.asserts.end());
  }
  if (!diags.empty()) return Status::Parse;
  out.program = desugarMultiParams(merged, &diags, file);
  if (!diags.empty()) return Status::Parse;
  if (upTo == Stage::Parse) return Status::Ok;

  std::vector<TypeError> errs;
  out.contexts = buildContexts(out.program, &errs);
  auto unresolved = resolveNames(out.program, *out.contexts.delta, out.asserts);
  errs.insert(errs.end(), unresolved.begin(), unresolved.end());
  if (!errs.empty()) {
    appendTypeErrors(errs, file, false, diags);
    return Status::TypeError;
  }
  if (upTo == Stage::Resolve) return Status::Ok;

  const auto& delta = *out.contexts.delta;
  const auto& sigma = *out.contexts.sigma;
  SeparationReport sep = checkSyntacticSeparation(out.program, delta, sigma);
  SeparationReport valid = checkShapeValidity(buildSdg(delta, sigma), delta);
  sep.violations.insert(sep.violations.end(), valid.violations.begin(), valid.violations.end());
  for (const auto& v : sep.violations) {
    SourceSpan sp = v.span.line ? v.span : spanOf(out.program, v.location);
    diags.push_back(Diagnostic{file, sp, Severity::Error, separationCode(v.kind),
                               toString(v.kind) + " at " + v.location + ": " + v.message});
  }
  if (!sep.ok()) return Status::Separation;
  if (upTo == Stage::Separation) return Status::Ok;

  CheckOptions co;
  co.trace = options.trace;
  co.avoidFuel = options.avoidFuel;
  CheckResult cr = checkProgram(out.program, co);
  if (!cr.ok()) {
    appendTypeErrors(cr.errors, file, options.trace, diags);
    return Status::TypeError;
  }
  out.checked = cr.checked;
  return Status::Ok;
}

namespace {

SubtypeResult decide(const Ctx& ctx, const Type& l, const Type& r, const PipelineOptions& o) {
  SubtypeOptions so;
  so.trace = o.trace;
  return o.expansion ? check(ctx, l, r, so) : isSubtype(ctx, l, r, so);
}

Outcome guarded(const std::function<Outcome()>& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    Outcome o;
    o.status = Status::Internal;
    o.diagnostics.push_back(Diagnostic{{}, {}, Severity::Error, "E0901", std::string("internal error: ") + e.what()});
    return o;
  }
}

}  // namespace

Outcome Session::check() {
  return guarded([&] {
    Outcome o;
    if (!file_) {
      o.status = Status::Usage;
      o.diagnostics.push_back(Diagnostic{{}, {}, Severity::Error, "E0001", "no input file"});
      return o;
    }
    Compiled c;
    o.status = compile(Stage::Typecheck, c, o.diagnostics);
    if (o.status != Status::Ok) return o;
    o.output = "main : " + toString(c.checked->mainType) + "\n";
    Ctx ctx = makeCtx(c.contexts, CheckOptions{options.trace, options.avoidFuel});
    for (const auto& a : c.asserts) {
      SubtypeResult r = decide(ctx, a.lhs, a.rhs, options);
      std::string rel = toString(a.lhs) + (a.expected ? " <: " : " </: ") + toString(a.rhs);
      if (r.holds == a.expected) continue;
      std::string msg = "assertion failed: " + rel;
      if (r.trace.ceilingHit) msg += " (derivation step ceiling reached)";
      if (options.trace && r.trace.tree) {
        msg += "\n  derivation attempt:\n" + r.trace.render();
        while (!msg.empty() && msg.back() == '\n') msg.pop_back();
      }
      o.diagnostics.push_back(Diagnostic{fileName(file_), a.span, Severity::Error, "E0501", msg});
      o.status = Status::AssertFailed;
    }
    return o;
  });
}

Outcome Session::subtype(const std::string& lhsText, const std::string& rhsText) {
  return guarded([&] {
    Outcome o;
    Compiled c;
    if (prelude_ || file_) {
      o.status = compile(Stage::Separation, c, o.diagnostics);
      if (o.status != Status::Ok) return o;
    } else {
      c.contexts = Contexts{std::make_shared<DefTable>(), std::make_shared<SubtypeTable>()};
    }
    auto lhs = parseType(lhsText, &o.diagnostics);
    auto rhs = parseType(rhsText, &o.diagnostics);
    if (!lhs || !rhs) {
      o.status = Status::Parse;
      return o;
    }
    std::set<std::string> names;
    collectNames(*lhs, names);
    collectNames(*rhs, names);
    for (const auto& n : names)
      if (!c.contexts.delta->count(n)) {
        o.diagnostics.push_back(Diagnostic{"<query>", {}, Severity::Error, "E0304", "unknown type name '" + n + "'"});
        o.status = Status::TypeError;
      }
    if (o.status != Status::Ok) return o;
    Ctx ctx = makeCtx(c.contexts, CheckOptions{options.trace, options.avoidFuel});
    SubtypeResult r = decide(ctx, *lhs, *rhs, options);
    o.output = std::string(r.holds ? "true" : "false") + "\n";
    if (options.trace && r.trace.tree) o.output += r.trace.render();
    if (r.trace.ceilingHit) o.output += "note: derivation step ceiling reached\n";
    if (!r.holds) o.status = Status::AssertFailed;
    return o;
  });
}

Outcome Session::run(std::optional<std::uint64_t> fuel) {
  return guarded([&] {
    Outcome o;
    if (!file_) {
      o.status = Status::Usage;
      o.diagnostics.push_back(Diagnostic{{}, {}, Severity::Error, "E0001", "no input file"});
      return o;
    }
    Compiled c;
    o.status = compile(Stage::Typecheck, c, o.diagnostics);
    if (o.status != Status::Ok) return o;
    std::optional<LocId> result;
    Heap heap;
    if (fuel) {
      EvalOutcome ev = evalFuel(Heap{}, c.program.main, *fuel);
      heap = std::move(ev.heap);
      result = ev.result;
    } else {
      BigResult br = evalBig(Heap{}, c.program.main);
      heap = std::move(br.heap);
      result = br.loc;
    }
    if (!result) {
      o.status = Status::Stuck;
      o.output = "stuck\n";
      o.diagnostics.push_back(Diagnostic{fileName(file_), c.program.main->span, Severity::Error, "E0401",
                                         "evaluation ran out of fuel (" + std::to_string(*fuel) + ")"});
      return o;
    }
    const HeapObject* obj = heap.find(*result);
    std::string labels;
    for (const auto& l : memberLabels(heap, *result)) labels += (labels.empty() ? "" : ", ") + l;
    o.output = "result : " + toString(Path::mkLoc(*result)) + "\n" + "type : " + toString(obj->ascribed) + "\n" +
               "members : " + labels + "\n" + "heap : " + std::to_string(heap.size()) + " objects\n";
    return o;
  });
}

Outcome Session::graph(GraphKind kind) {
  return guarded([&] {
    Outcome o;
    Compiled c;
    o.status = compile(Stage::Resolve, c, o.diagnostics);
    if (o.status != Status::Ok) return o;
    if (kind == GraphKind::Sdg) {
      auto g = buildSdg(*c.contexts.delta, *c.contexts.sigma);
      if (options.format == OutputFormat::Json) {
        nlohmann::json j;
        j["nodes"] = nlohmann::json::array();
        for (const auto& n : g.nodes)
          if (n.kind == SdgNode::Kind::Name || n.kind == SdgNode::Kind::Pseudo) j["nodes"].push_back(toString(n));
        j["edges"] = nlohmann::json::array();
        for (const auto& e : g.edges) {
          nlohmann::json je{{"from", toString(e.from)}, {"to", toString(e.to)}};
          je["label"] = nlohmann::json::array();
          for (const auto& b : e.label) je["label"].push_back(toString(b));
          if (e.variance) je["variance"] = toString(*e.variance);
          j["edges"].push_back(je);
        }
        o.output = j.dump(2) + "\n";
      } else {
        o.output = toDot(g);
      }
    } else {
      auto g = buildNominalGraph(*c.contexts.delta, *c.contexts.sigma);
      if (options.format == OutputFormat::Json) {
        nlohmann::json j;
        j["vertices"] = g.vertices;
        j["edges"] = nlohmann::json::array();
        for (const auto& e : g.edges)
          j["edges"].push_back({{"from", e.from}, {"to", e.to}, {"condition", toString(e.condition)}});
        o.output = j.dump(2) + "\n";
      } else {
        o.output = toDot(g);
      }
    }
    return o;
  });
}

Outcome Session::fuzz(std::uint64_t seed, std::uint64_t cases) {
  return guarded([&] {
    Outcome o;
    FuzzStats st = runFuzz(seed, cases);
    o.output = st.report();
    if (st.disagree || st.ceilingHits || st.separationFailures) o.status = Status::TypeError;
    return o;
  });
}

std::string diagnosticsToJson(const std::vector<Diagnostic>& ds) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& d : ds)
    arr.push_back({{"file", d.file},
                   {"line", d.span.line},
                   {"col", d.span.col},
                   {"severity", toString(d.severity)},
                   {"code", d.code},
                   {"message", d.message}});
  return arr.dump(2);
}

std::string outcomeToJson(const Outcome& o) {
  nlohmann::json j;
  j["status"] = static_cast<int>(o.status);
  // structured output (graphs, fuzz statistics) is embedded as JSON, everything else as text
  auto first = o.output.find_first_not_of(" \n\t");
  bool structured = first != std::string::npos && (o.output[first] == '{' || o.output[first] == '[') &&
                    nlohmann::json::accept(o.output);
  j["output"] = structured ? nlohmann::json::parse(o.output) : nlohmann::json(o.output);
  j["diagnostics"] = nlohmann::json::parse(diagnosticsToJson(o.diagnostics));
  return j.dump(2) + "\n";
}

}  // namespace nomwyv
