#include "nomwyv/eval.hpp"

namespace nomwyv {

const HeapObject* Heap::find(LocId l) const {
  auto it = objects.find(l);
  return it == objects.end() ? nullptr : &it->second;
}

bool Heap::operator==(const Heap& o) const {
  if (objects.size() != o.objects.size()) return false;
  for (auto a = objects.begin(), b = o.objects.begin(); a != objects.end(); ++a, ++b) {
    if (a->first != b->first || a->second.selfVar != b->second.selfVar || !(a->second.ascribed == b->second.ascribed) ||
        !(a->second.defs == b->second.defs))
      return false;
  }
  return true;
}

namespace {

[[noreturn]] void stuckOnIllTyped(const std::string& msg) { throw NomError(ErrorKind::Internal, msg); }

LocId locOf(const ExprPtr& e) {
  const Path* p = asPath(e);
  if (!p) stuckOnIllTyped("expression is not in A-normal form");
  if (p->isVar()) stuckOnIllTyped("free variable '" + p->var + "' during evaluation");
  return p->loc;
}

const ObjMemberDefn& member(const Heap& mu, LocId l, const std::string& label, ObjMemberDefn::Kind k,
                            const HeapObject** obj) {
  const HeapObject* o = mu.find(l);
  if (!o) stuckOnIllTyped("unbound location #" + std::to_string(l));
  for (const auto& d : o->defs)
    if (d.label == label && d.kind == k) {
      *obj = o;
      return d;
    }
  stuckOnIllTyped("object #" + std::to_string(l) + " has no member '" + label + "'");
}

// One evaluator for both judgments. Without fuel (fuel == nullopt) it is the plain big-step
// relation; with fuel every rule needs n+1 and method bodies and both halves of a let run at n.
class Evaluator {
 public:
  explicit Evaluator(Heap mu) : mu_(std::move(mu)) {}

  std::optional<LocId> eval(const ExprPtr& e, std::optional<std::uint64_t> fuel) {
    if (fuel && *fuel == 0) return std::nullopt;
    std::optional<std::uint64_t> next;
    if (fuel) next = *fuel - 1;
    switch (e->kind) {
      case Expr::Kind::PathE:
        return locOf(e);
      case Expr::Kind::FieldSel: {
        LocId l = locOf(e->target);
        const HeapObject* o = nullptr;
        const ObjMemberDefn& d = member(mu_, l, e->label, ObjMemberDefn::Kind::Field, &o);
        // p_v[x_s := l_s]; on closed programs this is a location
        ExprPtr v = substPath(d.value, o->selfVar, Path::mkLoc(l));
        return locOf(v);
      }
      case Expr::Kind::MethodApp: {
        LocId l = locOf(e->target);
        if (e->args.size() != 1) stuckOnIllTyped("method '" + e->label + "' applied to " +
                                                 std::to_string(e->args.size()) + " arguments");
        LocId a = locOf(e->args[0]);
        const HeapObject* o = nullptr;
        const ObjMemberDefn& d = member(mu_, l, e->label, ObjMemberDefn::Kind::Method, &o);
        if (d.params.size() != 1) stuckOnIllTyped("method '" + e->label + "' is not unary");
        ExprPtr body = d.body;
        const std::string& xa = d.params[0].name;
        if (xa == o->selfVar) {
          body = substPath(body, xa, Path::mkLoc(a));
        } else {
          body = substPath(body, o->selfVar, Path::mkLoc(l));
          body = substPath(body, xa, Path::mkLoc(a));
        }
        return eval(body, next);
      }
      case Expr::Kind::New: {
        LocId l = mu_.nextLoc();
        mu_.objects.emplace(l, HeapObject{e->var, e->defs, e->ty});
        return l;
      }
      case Expr::Kind::Let: {
        auto l1 = eval(e->bound, next);
        if (!l1) return std::nullopt;
        return eval(substPath(e->body, e->var, Path::mkLoc(*l1)), next);
      }
    }
    stuckOnIllTyped("unknown expression form");
  }

  Heap& heap() { return mu_; }

 private:
  Heap mu_;
};

}  // namespace

BigResult evalBig(const Heap& mu, const ExprPtr& e) {
  Evaluator ev(mu);
  auto l = ev.eval(e, std::nullopt);
  return BigResult{std::move(ev.heap()), *l};
}

EvalOutcome evalFuel(const Heap& mu, const ExprPtr& e, std::uint64_t n) {
  Evaluator ev(mu);
  auto l = ev.eval(e, n);
  return EvalOutcome{std::move(ev.heap()), l};
}

StoreEnv inferStoreEnv(const Heap& mu) {
  StoreEnv s;
  for (const auto& [l, o] : mu.objects) s[l] = o.ascribed;
  return s;
}

bool heapWellTyped(const Contexts& c, const StoreEnv& s, const Heap& mu, std::string* why) {
  if (s.size() != mu.size()) {
    if (why) *why = "store typing and heap have different domains";
    return false;
  }
  Ctx ctx = makeCtx(c).withStore(std::make_shared<StoreEnv>(s));
  for (const auto& [l, o] : mu.objects) {
    auto it = s.find(l);
    if (it == s.end()) {
      if (why) *why = "location #" + std::to_string(l) + " has no store type";
      return false;
    }
    try {
      typeObjDefn(ctx, o.selfVar, o.defs, it->second);
    } catch (const TypeCheckError& e) {
      if (why) *why = "#" + std::to_string(l) + ": " + e.error().message;
      return false;
    } catch (const NomError& e) {
      if (why) *why = "#" + std::to_string(l) + ": " + e.what();
      return false;
    }
  }
  return true;
}

std::vector<std::string> memberLabels(const Heap& mu, LocId l) {
  std::vector<std::string> out;
  if (const HeapObject* o = mu.find(l))
    for (const auto& d : o->defs) out.push_back(d.label);
  return out;
}

}  // namespace nomwyv
