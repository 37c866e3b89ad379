#include "nomwyv/nomwyv.h"

#include <string>

#include "nomwyv/pipeline.hpp"

struct nomwyv_session {
  nomwyv::Session session;
  bool color = false;
  std::string output;
  std::string diagnostics;
};

namespace {

nomwyv_status publish(nomwyv_session* s, const nomwyv::Outcome& o) {
  if (s->session.options.format == nomwyv::OutputFormat::Json) {
    s->output = nomwyv::outcomeToJson(o);
    s->diagnostics.clear();
  } else {
    s->output = o.output;
    s->diagnostics = nomwyv::render(o.diagnostics, s->color);
  }
  return static_cast<nomwyv_status>(o.status);
}

nomwyv_status failWith(nomwyv_session* s, nomwyv_status st, const std::string& msg) {
  nomwyv::Outcome o;
  o.status = static_cast<nomwyv::Status>(st);
  o.diagnostics.push_back(nomwyv::Diagnostic{{}, {}, nomwyv::Severity::Error, "E0001", msg});
  return publish(s, o);
}

template <class F>
nomwyv_status guard(nomwyv_session* s, F f) {
  if (!s) return NOMWYV_USAGE;
  try {
    return f();
  } catch (const std::exception& e) {
    return failWith(s, NOMWYV_INTERNAL, std::string("internal error: ") + e.what());
  } catch (...) {
    return failWith(s, NOMWYV_INTERNAL, "internal error");
  }
}

}  // namespace

extern "C" {

const char* nomwyv_version(void) { return "0.1.0"; }

const char* nomwyv_status_name(nomwyv_status s) {
  switch (s) {
    case NOMWYV_OK: return "ok";
    case NOMWYV_TYPE_ERROR: return "type error";
    case NOMWYV_SEPARATION: return "separation violation";
    case NOMWYV_PARSE: return "parse error";
    case NOMWYV_STUCK: return "stuck";
    case NOMWYV_ASSERT_FAILED: return "assertion failed";
    case NOMWYV_USAGE: return "usage error";
    case NOMWYV_IO: return "i/o error";
    case NOMWYV_INTERNAL: return "internal error";
  }
  return "unknown";
}

nomwyv_session* nomwyv_session_create(void) {
  try {
    return new nomwyv_session();
  } catch (...) {
    return nullptr;
  }
}

void nomwyv_session_destroy(nomwyv_session* s) { delete s; }

nomwyv_status nomwyv_set_expansion(nomwyv_session* s, int enabled) {
  return guard(s, [&] {
    s->session.options.expansion = enabled != 0;
    return NOMWYV_OK;
  });
}

nomwyv_status nomwyv_set_avoid_fuel(nomwyv_session* s, uint32_t fuel) {
  return guard(s, [&] {
    s->session.options.avoidFuel = static_cast<int>(fuel);
    return NOMWYV_OK;
  });
}

nomwyv_status nomwyv_set_trace(nomwyv_session* s, int enabled) {
  return guard(s, [&] {
    s->session.options.trace = enabled != 0;
    return NOMWYV_OK;
  });
}

nomwyv_status nomwyv_set_color(nomwyv_session* s, int enabled) {
  return guard(s, [&] {
    s->color = enabled != 0;
    return NOMWYV_OK;
  });
}

nomwyv_status nomwyv_set_format(nomwyv_session* s, nomwyv_format f) {
  return guard(s, [&] {
    switch (f) {
      case NOMWYV_FORMAT_TEXT: s->session.options.format = nomwyv::OutputFormat::Text; break;
      case NOMWYV_FORMAT_DOT: s->session.options.format = nomwyv::OutputFormat::Dot; break;
      case NOMWYV_FORMAT_JSON: s->session.options.format = nomwyv::OutputFormat::Json; break;
      default: return NOMWYV_USAGE;
    }
    return NOMWYV_OK;
  });
}

nomwyv_status nomwyv_load_prelude(nomwyv_session* s, const char* path) {
  return guard(s, [&] {
    if (!path) return failWith(s, NOMWYV_USAGE, "no prelude path");
    std::string err;
    if (!s->session.loadPrelude(path, &err)) return failWith(s, NOMWYV_IO, err);
    return NOMWYV_OK;
  });
}

nomwyv_status nomwyv_load_file(nomwyv_session* s, const char* path) {
  return guard(s, [&] {
    if (!path) return failWith(s, NOMWYV_USAGE, "no input path");
    std::string err;
    if (!s->session.loadFile(path, &err)) return failWith(s, NOMWYV_IO, err);
    return NOMWYV_OK;
  });
}

nomwyv_status nomwyv_load_source(nomwyv_session* s, const char* name, const char* text) {
  return guard(s, [&] {
    if (!text) return failWith(s, NOMWYV_USAGE, "no source text");
    s->session.loadSource(name ? name : "<input>", text);
    return NOMWYV_OK;
  });
}

nomwyv_status nomwyv_check(nomwyv_session* s) {
  return guard(s, [&] { return publish(s, s->session.check()); });
}

nomwyv_status nomwyv_subtype(nomwyv_session* s, const char* lhs, const char* rhs) {
  return guard(s, [&] {
    if (!lhs || !rhs) return failWith(s, NOMWYV_USAGE, "subtype needs both --lhs and --rhs");
    return publish(s, s->session.subtype(lhs, rhs));
  });
}

nomwyv_status nomwyv_run(nomwyv_session* s, int64_t fuel) {
  return guard(s, [&] {
    std::optional<std::uint64_t> f;
    if (fuel >= 0) f = static_cast<std::uint64_t>(fuel);
    return publish(s, s->session.run(f));
  });
}

nomwyv_status nomwyv_graph(nomwyv_session* s, nomwyv_graph_kind kind) {
  return guard(s, [&] {
    return publish(s, s->session.graph(kind == NOMWYV_GRAPH_NOMINAL ? nomwyv::GraphKind::Nominal
                                                                     : nomwyv::GraphKind::Sdg));
  });
}

nomwyv_status nomwyv_fuzz(nomwyv_session* s, uint64_t seed, uint64_t cases) {
  return guard(s, [&] { return publish(s, s->session.fuzz(seed, cases)); });
}

const char* nomwyv_output(const nomwyv_session* s) { return s ? s->output.c_str() : ""; }
const char* nomwyv_diagnostics(const nomwyv_session* s) { return s ? s->diagnostics.c_str() : ""; }

}  // extern "C"
