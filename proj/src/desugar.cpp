// Multi-parameter methods become unary methods over generated record types.
//   def f(a: A, b: B): R = e   ~>  def f($args: Tup$f$2$h): R = let a = $args.a in let b = $args.b in e
//   p.f(x, y)                  ~>  let $aN = new Tup$f$2$h { $t => val a: A = x; val b: B = y } in p.f($aN)
#include <cstdio>
#include <map>

#include "nomwyv/parser.hpp"

namespace nomwyv {
namespace {

struct Signature {
  std::string label;
  std::vector<Param> params;
  std::string tupleName;
  bool valid = true;
};

std::string signatureKey(const std::string& label, const std::vector<Param>& params) {
  std::string s = label + "(";
  for (const auto& p : params) s += p.name + ":" + toString(p.ty) + ",";
  return s + ")";
}

std::string tupleNameFor(const std::string& label, const std::vector<Param>& params) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : signatureKey(label, params)) {
    h ^= c;
    h *= 16777619u;
  }
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", h);
  return "Tup$" + label + "$" + std::to_string(params.size()) + "$" + buf;
}

class Desugarer {
 public:
  Desugarer(std::vector<Diagnostic>* diags, std::string file) : diags_(diags), file_(std::move(file)) {}

  Program run(const Program& p) {
    for (const auto& d : p.decls)
      if (d.kind == TopDecl::Kind::Named)
        for (const auto& m : d.members)
          if (m.kind == MemberDecl::Kind::Method) note(m.label, m.params, m.resultTy, m.span);
    collect(p.main);

    Program out;
    std::set<std::string> declared;
    for (const auto& d : p.decls) {
      TopDecl nd = d;
      if (nd.kind == TopDecl::Kind::Named) {
        declared.insert(nd.name);
        for (auto& m : nd.members)
          if (m.kind == MemberDecl::Kind::Method) rewriteDecl(m);
      }
      out.decls.push_back(std::move(nd));
    }
    for (const auto& s : order_) {
      if (!s.valid || declared.count(s.tupleName)) continue;
      TopDecl t;
      t.kind = TopDecl::Kind::Named;
      t.name = s.tupleName;
      t.selfVar = "$t";
      for (const auto& prm : s.params) t.members.push_back(MemberDecl::field(prm.name, prm.ty));
      declared.insert(t.name);
      out.decls.push_back(std::move(t));
    }
    out.main = rewrite(p.main);
    return out;
  }

 private:
  void diag(SourceSpan sp, const std::string& msg) {
    if (diags_) diags_->push_back(Diagnostic{file_, sp, Severity::Error, "E0109", msg});
  }

  void note(const std::string& label, const std::vector<Param>& params, const Type& result,
            SourceSpan sp) {
    if (params.size() == 1) return;
    std::string key = signatureKey(label, params);
    if (byKey_.count(key)) return;
    Signature s{label, params, tupleNameFor(label, params), true};
    std::set<std::string> names;
    for (const auto& prm : params) {
      if (!freeVars(prm.ty).empty()) {
        diag(sp, "parameter types of multi-parameter method '" + label + "' must not mention variables");
        s.valid = false;
      }
      names.insert(prm.name);
    }
    for (const auto& v : freeVars(result))
      if (names.count(v)) {
        diag(sp, "result type of multi-parameter method '" + label + "' may not mention its parameters");
        s.valid = false;
      }
    byKey_[key] = order_.size();
    order_.push_back(s);
  }

  void collect(const ExprPtr& e) {
    if (!e) return;
    switch (e->kind) {
      case Expr::Kind::PathE:
        return;
      case Expr::Kind::FieldSel:
        collect(e->target);
        return;
      case Expr::Kind::MethodApp:
        collect(e->target);
        for (const auto& a : e->args) collect(a);
        return;
      case Expr::Kind::New:
        for (const auto& d : e->defs) {
          if (d.kind == ObjMemberDefn::Kind::Method) {
            note(d.label, d.params, d.resultTy, d.span);
            collect(d.body);
          }
          if (d.kind == ObjMemberDefn::Kind::Field) collect(d.value);
        }
        return;
      case Expr::Kind::Let:
        collect(e->bound);
        collect(e->body);
        return;
    }
  }

  const Signature* find(const std::string& label, const std::vector<Param>& params) const {
    auto it = byKey_.find(signatureKey(label, params));
    if (it == byKey_.end() || !order_[it->second].valid) return nullptr;
    return &order_[it->second];
  }

  void rewriteDecl(MemberDecl& m) {
    if (m.params.size() == 1) return;
    const Signature* s = find(m.label, m.params);
    if (!s) return;
    m.params = {Param{"$args", Type::named(s->tupleName)}};
  }

  ObjMemberDefn rewriteDefn(const ObjMemberDefn& d) {
    ObjMemberDefn out = d;
    if (d.kind == ObjMemberDefn::Kind::Field) {
      out.value = rewrite(d.value);
      return out;
    }
    if (d.kind != ObjMemberDefn::Kind::Method) return out;
    out.body = rewrite(d.body);
    if (d.params.size() == 1) return out;
    const Signature* s = find(d.label, d.params);
    if (!s) return out;
    ExprPtr args = mkPath(Path::mkVar("$args"), d.span);
    ExprPtr body = out.body;
    for (size_t i = d.params.size(); i-- > 0;)
      body = mkLet(d.params[i].name, std::nullopt, mkFieldSel(args, d.params[i].name, d.span), body, d.span);
    out.params = {Param{"$args", Type::named(s->tupleName)}};
    out.body = body;
    return out;
  }

  ExprPtr rewriteCall(const ExprPtr& e) {
    std::vector<ExprPtr> args;
    for (const auto& a : e->args) args.push_back(rewrite(a));
    ExprPtr target = rewrite(e->target);
    if (args.size() == 1) return mkMethodApp(target, e->label, std::move(args), e->span);

    const Signature* s = nullptr;
    int matches = 0;
    for (const auto& cand : order_)
      if (cand.valid && cand.label == e->label && cand.params.size() == args.size()) {
        if (!s) s = &cand;
        ++matches;
      }
    if (!s) {
      diag(e->span, "no multi-parameter method '" + e->label + "' taking " + std::to_string(args.size()) +
                        " arguments is declared");
      return mkMethodApp(target, e->label, std::move(args), e->span);
    }
    if (matches > 1)
      diag(e->span, "call to '" + e->label + "' is ambiguous between " + std::to_string(matches) +
                        " multi-parameter signatures");
    std::vector<ObjMemberDefn> fields;
    for (size_t i = 0; i < args.size(); ++i) {
      ObjMemberDefn f;
      f.kind = ObjMemberDefn::Kind::Field;
      f.label = s->params[i].name;
      f.ty = s->params[i].ty;
      f.value = args[i];
      f.span = e->span;
      fields.push_back(std::move(f));
    }
    std::string tmp = "$a" + std::to_string(++counter_);
    ExprPtr record = mkNew(Type::named(s->tupleName), "$t", std::move(fields), e->span);
    ExprPtr call = mkMethodApp(target, e->label, {mkPath(Path::mkVar(tmp), e->span)}, e->span);
    return mkLet(tmp, std::nullopt, record, call, e->span);
  }

  ExprPtr rewrite(const ExprPtr& e) {
    if (!e) return e;
    switch (e->kind) {
      case Expr::Kind::PathE:
        return e;
      case Expr::Kind::FieldSel:
        return mkFieldSel(rewrite(e->target), e->label, e->span);
      case Expr::Kind::MethodApp:
        return rewriteCall(e);
      case Expr::Kind::New: {
        std::vector<ObjMemberDefn> defs;
        for (const auto& d : e->defs) defs.push_back(rewriteDefn(d));
        return mkNew(e->ty, e->var, std::move(defs), e->span);
      }
      case Expr::Kind::Let:
        return mkLet(e->var, e->ascription, rewrite(e->bound), rewrite(e->body), e->span);
    }
    return e;
  }

  std::vector<Diagnostic>* diags_;
  std::string file_;
  std::vector<Signature> order_;
  std::map<std::string, size_t> byKey_;
  int counter_ = 0;
};

}  // namespace

Program desugarMultiParams(const Program& p, std::vector<Diagnostic>* diags, const std::string& file) {
  return Desugarer(diags, file).run(p);
}

}  // namespace nomwyv
