#include "nomwyv/graphs.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>
#include <sstream>
#include <tuple>

#include "nomwyv/errors.hpp"

namespace nomwyv {

bool SdgNode::operator<(const SdgNode& o) const {
  return std::tie(kind, name, member) < std::tie(o.kind, o.name, o.member);
}

std::string toString(const SdgNode& n) {
  switch (n.kind) {
    case SdgNode::Kind::Top: return "Top";
    case SdgNode::Kind::Bot: return "Bot";
    case SdgNode::Kind::Name: return n.name;
    case SdgNode::Kind::Pseudo: return n.name + "::" + n.member;
  }
  return "?";
}

std::string toString(ViolationKind k) {
  switch (k) {
    case ViolationKind::ShapeInLowerBound: return "ShapeInLowerBound";
    case ViolationKind::ShapeUpperNotShape: return "ShapeUpperNotShape";
    case ViolationKind::ShapeRefinedInRefinement: return "ShapeRefinedInRefinement";
    case ViolationKind::UnguardedCycle: return "UnguardedCycle";
  }
  return "?";
}

NominalGraph buildNominalGraph(const DefTable& delta, const SubtypeTable& sigma) {
  NominalGraph g;
  for (const auto& [n, _] : delta) g.vertices.push_back(n);
  for (const auto& s : sigma) g.edges.push_back(NominalEdge{s.lhsName, s.rhsName, s.lhsRefinement});
  return g;
}

namespace {

const MemberDecl* typeMemberOf(const DefTable& delta, const std::string& n, const std::string& t) {
  auto it = delta.find(n);
  if (it == delta.end()) return nullptr;
  for (const auto& m : it->second.members)
    if (m.kind == MemberDecl::Kind::TypeMember && m.label == t) return &m;
  return nullptr;
}

class SdgBuilder {
 public:
  explicit SdgBuilder(const DefTable& delta) : delta_(delta) {}

  // GenEdges(β, r, root, acc): GE-EMP emits root → β labeled acc; GE-LIST recurses into each
  // refinement member with the outer β appended to acc.
  void gen(const std::string& owner, const Type& ty, const SdgNode& root, std::vector<BaseType> acc,
           Bound variance) {
    if (!ty.isRefined()) return;  // edges into Top/Bot are sinks and are not recorded
    if (auto target = nodeOf(owner, ty.base))
      g.edges.push_back(SdgEdge{root, *target, acc, variance});
    acc.push_back(ty.base);
    for (const auto& m : ty.refinement.members) gen(owner, m.ty, root, acc, variance);
  }

  std::optional<SdgNode> nodeOf(const std::string& owner, const BaseType& b) const {
    if (b.isNamed()) return SdgNode::nameNode(b.name);
    // inside a declaration the only variable in scope is the owner's self variable
    if (!b.path.isVar() || owner.empty()) return std::nullopt;
    auto it = delta_.find(owner);
    if (it == delta_.end() || it->second.selfVar != b.path.var) return std::nullopt;
    return SdgNode::pseudo(owner, b.label);
  }

  SubtypeDependencyGraph g;

 private:
  const DefTable& delta_;
};

void collectRootNames(const Refinement& r, std::vector<std::string>& out) {
  for (const auto& m : r.members) {
    if (!m.ty.isRefined()) continue;
    if (m.ty.base.isNamed()) out.push_back(m.ty.base.name);
    collectRootNames(m.ty.refinement, out);
  }
}

}  // namespace

SubtypeDependencyGraph buildSdg(const DefTable& delta, const SubtypeTable& sigma) {
  SdgBuilder b(delta);
  b.g.nodes.push_back(SdgNode::top());
  b.g.nodes.push_back(SdgNode::bot());
  for (const auto& [n, def] : delta) {
    b.g.nodes.push_back(SdgNode::nameNode(n));
    for (const auto& m : def.members)
      if (m.kind == MemberDecl::Kind::TypeMember) b.g.nodes.push_back(SdgNode::pseudo(n, m.label));
  }
  for (const auto& [n, def] : delta)
    for (const auto& m : def.members)
      if (m.kind == MemberDecl::Kind::TypeMember) b.gen(n, m.ty, SdgNode::pseudo(n, m.label), {}, m.bound);
  for (const auto& s : sigma) {
    // back
    b.g.edges.push_back(SdgEdge{SdgNode::nameNode(s.rhsName), SdgNode::nameNode(s.lhsName), {}, std::nullopt});
    // back-ref-root, over every nested refinement
    std::vector<std::string> roots;
    collectRootNames(s.lhsRefinement, roots);
    for (const auto& r : roots)
      b.g.edges.push_back(SdgEdge{SdgNode::nameNode(s.rhsName), SdgNode::nameNode(r), {}, std::nullopt});
  }
  return b.g;
}

bool isShapeBase(const DefTable& delta, const std::string& owner, const BaseType& b) {
  if (b.isNamed()) {
    auto it = delta.find(b.name);
    return it != delta.end() && it->second.mark == ShapeMark::Shape;
  }
  const MemberDecl* m = typeMemberOf(delta, owner, b.label);
  return m && m->mark == ShapeMark::Shape;
}

// ---- Definition 2 ----

namespace {

class SeparationChecker {
 public:
  explicit SeparationChecker(const DefTable& delta) : delta_(delta) {}

  struct Scope {
    std::string owner;
    std::string selfVar;
    std::map<std::string, std::string> varNames;  // variable -> name of its declared named type
  };

  bool isShape(const BaseType& b, const Scope& s) const {
    if (b.isNamed()) return isShapeBase(delta_, "", b);
    if (!b.path.isVar()) return false;
    if (!s.owner.empty() && b.path.var == s.selfVar) return isShapeBase(delta_, s.owner, b);
    auto it = s.varNames.find(b.path.var);
    if (it == s.varNames.end()) return false;
    return isShapeBase(delta_, it->second, b);
  }

  std::optional<std::string> shapeIn(const Type& ty, const Scope& s) const {
    if (!ty.isRefined()) return std::nullopt;
    if (isShape(ty.base, s)) return toString(ty.base);
    for (const auto& m : ty.refinement.members)
      if (auto r = shapeIn(m.ty, s)) return r;
    return std::nullopt;
  }

  void add(ViolationKind k, const std::string& loc, const std::string& msg, SourceSpan sp) {
    if (!seen_.insert(toString(k) + "|" + loc + "|" + msg).second) return;
    report.violations.push_back(Violation{k, loc, msg, sp, {}});
  }

  void checkBound(Bound b, const Type& ty, const Scope& s, const std::string& loc, SourceSpan sp) {
    if (b == Bound::LE) return;
    if (auto sh = shapeIn(ty, s))
      add(ViolationKind::ShapeInLowerBound, loc,
          "shape '" + *sh + "' is used in a lower bound (" + toString(b) + " " + toString(ty) + ")", sp);
  }

  void checkType(const Type& ty, const Scope& s, const std::string& loc, SourceSpan sp) {
    if (!ty.isRefined()) return;
    for (const auto& m : ty.refinement.members) {
      checkBound(m.bound, m.ty, s, loc, sp);
      if (m.ty.isRefined() && isShape(m.ty.base, s) && !m.ty.refinement.empty())
        add(ViolationKind::ShapeRefinedInRefinement, loc,
            "shape '" + toString(m.ty.base) + "' is refined inside a refinement of " + toString(ty), sp);
      checkType(m.ty, s, loc, sp);
    }
  }

  static std::optional<std::string> namedOf(const Type& t) {
    if (t.isNamed()) return t.base.name;
    return std::nullopt;
  }

  void checkDecl(const TopDecl& d) {
    if (d.kind == TopDecl::Kind::Subtype) {
      std::string loc = "subtype " + d.lhsName + " <: " + d.rhsName;
      Scope s;
      checkType(Type::named(d.lhsName, d.lhsRefinement), s, loc, d.span);
      auto l = delta_.find(d.lhsName);
      auto r = delta_.find(d.rhsName);
      if (l != delta_.end() && r != delta_.end() && l->second.mark == ShapeMark::Shape &&
          r->second.mark != ShapeMark::Shape)
        add(ViolationKind::ShapeUpperNotShape, loc,
            "shape '" + d.lhsName + "' may only subtype shapes, but '" + d.rhsName + "' is material", d.span);
      return;
    }
    Scope s{d.name, d.selfVar, {}};
    for (const auto& m : d.members) {
      std::string loc = d.name + "::" + m.label;
      switch (m.kind) {
        case MemberDecl::Kind::TypeMember:
          checkBound(m.bound, m.ty, s, loc, m.span);
          checkType(m.ty, s, loc, m.span);
          if (m.mark == ShapeMark::Shape && m.bound != Bound::GE && !m.ty.isTop() &&
              !(m.ty.isRefined() && isShape(m.ty.base, s)))
            add(ViolationKind::ShapeUpperNotShape, loc,
                "the upper bound " + toString(m.ty) + " of shape member '" + m.label + "' is not a shape", m.span);
          break;
        case MemberDecl::Kind::Field:
          checkType(m.ty, s, loc, m.span);
          break;
        case MemberDecl::Kind::Method: {
          Scope ms = s;
          for (const auto& p : m.params) {
            checkType(p.ty, ms, loc, m.span);
            if (auto n = namedOf(p.ty)) ms.varNames[p.name] = *n;
          }
          checkType(m.resultTy, ms, loc, m.span);
          break;
        }
      }
    }
  }

  void checkExpr(const ExprPtr& e, Scope s) {
    if (!e) return;
    switch (e->kind) {
      case Expr::Kind::PathE:
      case Expr::Kind::FieldSel:
      case Expr::Kind::MethodApp:
        return;
      case Expr::Kind::New: {
        checkType(e->ty, s, "main", e->span);
        if (auto n = namedOf(e->ty)) s.varNames[e->var] = *n;
        for (const auto& d : e->defs) {
          switch (d.kind) {
            case ObjMemberDefn::Kind::TypeMember:
              checkBound(Bound::EQ, d.ty, s, "main", d.span);
              checkType(d.ty, s, "main", d.span);
              break;
            case ObjMemberDefn::Kind::Field:
              checkType(d.ty, s, "main", d.span);
              break;
            case ObjMemberDefn::Kind::Method: {
              Scope ms = s;
              for (const auto& p : d.params) {
                checkType(p.ty, ms, "main", d.span);
                if (auto n = namedOf(p.ty)) ms.varNames[p.name] = *n;
              }
              checkType(d.resultTy, ms, "main", d.span);
              checkExpr(d.body, ms);
              break;
            }
          }
        }
        return;
      }
      case Expr::Kind::Let: {
        if (e->ascription) checkType(*e->ascription, s, "main", e->span);
        checkExpr(e->bound, s);
        Scope bs = s;
        std::optional<std::string> n;
        if (e->ascription) n = namedOf(*e->ascription);
        else if (e->bound && e->bound->kind == Expr::Kind::New) n = namedOf(e->bound->ty);
        if (n) bs.varNames[e->var] = *n;
        else bs.varNames.erase(e->var);
        checkExpr(e->body, bs);
        return;
      }
    }
  }

  SeparationReport report;

 private:
  const DefTable& delta_;
  std::set<std::string> seen_;
};

}  // namespace

SeparationReport checkSyntacticSeparation(const Program& p, const DefTable& delta, const SubtypeTable&) {
  SeparationChecker c(delta);
  for (const auto& d : p.decls) c.checkDecl(d);
  c.checkExpr(p.main, {});
  return c.report;
}

// ---- partitions and Definition 3 ----

std::vector<SubtypeDependencyGraph> partitionSdg(const SubtypeDependencyGraph& g) {
  std::map<std::string, SubtypeDependencyGraph> perName;
  SubtypeDependencyGraph names;
  for (const auto& n : g.nodes) {
    if (n.kind == SdgNode::Kind::Name) {
      names.nodes.push_back(n);
      perName[n.name].partition = n.name;
    }
    if (n.kind == SdgNode::Kind::Pseudo) {
      auto& part = perName[n.name];
      part.partition = n.name;
      part.nodes.push_back(n);
    }
  }
  for (const auto& e : g.edges) {
    if (e.from.kind == SdgNode::Kind::Pseudo) {
      auto& part = perName[e.from.name];
      part.partition = e.from.name;
      part.edges.push_back(e);
    } else if (e.from.kind == SdgNode::Kind::Name) {
      names.edges.push_back(e);
    }
  }
  std::vector<SubtypeDependencyGraph> out;
  for (auto& [_, part] : perName) out.push_back(std::move(part));
  out.push_back(std::move(names));
  return out;
}

namespace {

bool labelHasShape(const DefTable& delta, const SdgEdge& e) {
  std::string owner = e.from.kind == SdgNode::Kind::Pseudo ? e.from.name : "";
  for (const auto& b : e.label)
    if (isShapeBase(delta, owner, b)) return true;
  return false;
}

// Tarjan's SCC over the edge list.
std::vector<std::vector<SdgNode>> stronglyConnected(const std::vector<SdgNode>& nodes,
                                                    const std::map<SdgNode, std::vector<SdgNode>>& adj) {
  std::map<SdgNode, int> index, low;
  std::set<SdgNode> onStack;
  std::vector<SdgNode> stack;
  std::vector<std::vector<SdgNode>> out;
  int counter = 0;
  std::function<void(const SdgNode&)> visit = [&](const SdgNode& v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    onStack.insert(v);
    auto it = adj.find(v);
    if (it != adj.end())
      for (const auto& w : it->second) {
        if (!index.count(w)) {
          visit(w);
          low[v] = std::min(low[v], low[w]);
        } else if (onStack.count(w)) {
          low[v] = std::min(low[v], index[w]);
        }
      }
    if (low[v] == index[v]) {
      std::vector<SdgNode> comp;
      SdgNode w;
      do {
        w = stack.back();
        stack.pop_back();
        onStack.erase(w);
        comp.push_back(w);
      } while (!(w == v));
      out.push_back(std::move(comp));
    }
  };
  for (const auto& n : nodes)
    if (!index.count(n)) visit(n);
  return out;
}

// Shortest cycle through the component, found by BFS from each member.
std::vector<SdgNode> smallestCycle(const std::vector<SdgNode>& comp,
                                   const std::map<SdgNode, std::vector<SdgNode>>& adj) {
  std::set<SdgNode> inComp(comp.begin(), comp.end());
  std::vector<SdgNode> best;
  std::vector<SdgNode> sorted = comp;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& s : sorted) {
    std::map<SdgNode, SdgNode> parent;
    std::deque<SdgNode> q{s};
    std::set<SdgNode> seen{s};
    bool found = false;
    SdgNode last;
    while (!q.empty() && !found) {
      SdgNode v = q.front();
      q.pop_front();
      auto it = adj.find(v);
      if (it == adj.end()) continue;
      for (const auto& w : it->second) {
        if (!inComp.count(w)) continue;
        if (w == s) {
          found = true;
          last = v;
          break;
        }
        if (seen.insert(w).second) {
          parent[w] = v;
          q.push_back(w);
        }
      }
    }
    if (!found) continue;
    std::vector<SdgNode> cyc;
    for (SdgNode v = last;; v = parent[v]) {
      cyc.push_back(v);
      if (v == s) break;
    }
    std::reverse(cyc.begin(), cyc.end());
    if (best.empty() || cyc.size() < best.size()) best = cyc;
  }
  return best;
}

}  // namespace

SeparationReport checkShapeValidity(const SubtypeDependencyGraph& g, const DefTable& delta) {
  SeparationReport rep;
  for (const auto& part : partitionSdg(g)) {
    std::map<SdgNode, std::vector<SdgNode>> adj;
    std::set<SdgNode> selfLoops;
    for (const auto& e : part.edges) {
      if (labelHasShape(delta, e)) continue;
      // pseudotype -> name edges are terminal within a per-name partition
      if (e.from.kind == SdgNode::Kind::Pseudo && e.to.kind != SdgNode::Kind::Pseudo) continue;
      auto& out = adj[e.from];
      if (std::find(out.begin(), out.end(), e.to) == out.end()) out.push_back(e.to);
      if (e.from == e.to) selfLoops.insert(e.from);
    }
    for (const auto& comp : stronglyConnected(part.nodes, adj)) {
      if (comp.size() == 1 && !selfLoops.count(comp[0])) continue;
      auto cyc = smallestCycle(comp, adj);
      std::string msg = "unguarded cycle: ";
      for (const auto& n : cyc) msg += toString(n) + " -> ";
      msg += toString(cyc.front());
      rep.violations.push_back(Violation{ViolationKind::UnguardedCycle, toString(cyc.front()), msg, {}, cyc});
    }
  }
  return rep;
}

// ---- measures ----

namespace {

class Measures {
 public:
  Measures(const DefTable& delta, const SubtypeTable& sigma, const SubtypeDependencyGraph& g)
      : delta_(delta), sigma_(sigma) {
    for (const auto& e : g.edges)
      if (e.from.kind == SdgNode::Kind::Pseudo && e.to.kind == SdgNode::Kind::Pseudo &&
          e.from.name == e.to.name && !labelHasShape(delta, e) && e.variance)
        edges_[e.from].push_back({e.to, *e.variance});
  }

  std::uint64_t energy(const std::string& n) {
    SdgNode key = SdgNode::nameNode(n);
    if (auto it = t_.e.find(key); it != t_.e.end()) return it->second;
    if (!visitingE_.insert(n).second)
      throw NomError(ErrorKind::DivergentMeasure, "energy of '" + n + "' depends on itself");
    std::set<std::string> deps;
    for (const auto& s : sigma_)
      if (s.rhsName == n) {
        deps.insert(s.lhsName);
        std::set<std::string> inner;
        for (const auto& m : s.lhsRefinement.members) collectNames(m.ty, inner);
        deps.insert(inner.begin(), inner.end());
      }
    std::uint64_t v = 1;
    for (const auto& d : deps) v += energy(d);
    visitingE_.erase(n);
    t_.e[key] = v;
    return v;
  }

  // T(n::t): same-name pseudotypes mentioned in t's bound and reachable along non-shape
  // edges of t's variance.
  std::vector<SdgNode> dependencySet(const std::string& n, const MemberDecl& m) {
    Bound b = m.bound;
    SdgNode start = SdgNode::pseudo(n, m.label);
    std::set<SdgNode> reach;
    std::deque<SdgNode> q{start};
    while (!q.empty()) {
      SdgNode v = q.front();
      q.pop_front();
      for (const auto& [w, var] : edges_[v])
        if (var == b && reach.insert(w).second) q.push_back(w);
    }
    std::set<std::string> mentioned;
    collectSelfMembers(m.ty, delta_.at(n).selfVar, mentioned);
    std::vector<SdgNode> out;
    for (const auto& t : mentioned) {
      SdgNode w = SdgNode::pseudo(n, t);
      if (reach.count(w)) out.push_back(w);
    }
    return out;
  }

  void measure(const std::string& n, const MemberDecl& m) {
    SdgNode key = SdgNode::pseudo(n, m.label);
    if (t_.m.count(key)) return;
    if (!visitingM_.insert(key).second)
      throw NomError(ErrorKind::DivergentMeasure, "measure of '" + toString(key) + "' depends on itself");
    std::uint64_t mv = 1, av = 1;
    for (const auto& dep : dependencySet(n, m)) {
      const MemberDecl* dm = typeMemberOf(delta_, n, dep.member);
      if (!dm) continue;
      measure(n, *dm);
      mv += t_.m[dep];
      av += t_.a[dep];
    }
    std::set<std::string> names;
    collectNames(m.ty, names);
    for (const auto& nn : names)
      if (delta_.count(nn)) av += energy(nn);
    visitingM_.erase(key);
    t_.m[key] = mv;
    t_.a[key] = av;
  }

  MeasureTable run() {
    t_.e[SdgNode::top()] = 0;
    t_.e[SdgNode::bot()] = 0;
    for (const auto& [n, def] : delta_) {
      energy(n);
      for (const auto& m : def.members)
        if (m.kind == MemberDecl::Kind::TypeMember) measure(n, m);
    }
    return t_;
  }

 private:
  static void collectSelfMembers(const Type& ty, const std::string& self, std::set<std::string>& out) {
    if (!ty.isRefined()) return;
    if (!ty.base.isNamed() && ty.base.path.isVar(self)) out.insert(ty.base.label);
    for (const auto& m : ty.refinement.members) collectSelfMembers(m.ty, self, out);
  }

  const DefTable& delta_;
  const SubtypeTable& sigma_;
  std::map<SdgNode, std::vector<std::pair<SdgNode, Bound>>> edges_;
  std::set<std::string> visitingE_;
  std::set<SdgNode> visitingM_;
  MeasureTable t_;
};

std::string dotId(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

MeasureTable computeMeasures(const DefTable& delta, const SubtypeTable& sigma, const SubtypeDependencyGraph& g) {
  return Measures(delta, sigma, g).run();
}

std::string toDot(const SubtypeDependencyGraph& g) {
  std::ostringstream os;
  os << "digraph sdg {\n  node [shape=box];\n";
  std::vector<SdgNode> nodes;
  for (const auto& n : g.nodes)
    if (n.kind == SdgNode::Kind::Name || n.kind == SdgNode::Kind::Pseudo) nodes.push_back(n);
  std::sort(nodes.begin(), nodes.end());
  for (const auto& n : nodes) {
    os << "  " << dotId(toString(n));
    if (n.kind == SdgNode::Kind::Name) os << " [style=rounded]";
    os << ";\n";
  }
  for (const auto& e : g.edges) {
    os << "  " << dotId(toString(e.from)) << " -> " << dotId(toString(e.to));
    if (!e.label.empty()) {
      std::string l;
      for (size_t i = 0; i < e.label.size(); ++i) l += (i ? ", " : "") + toString(e.label[i]);
      os << " [label=" << dotId(l) << "]";
    }
    os << ";\n";
  }
  os << "}\n";
  return os.str();
}

std::string toDot(const NominalGraph& g) {
  std::ostringstream os;
  os << "digraph nominal {\n  node [shape=box, style=rounded];\n";
  for (const auto& v : g.vertices) os << "  " << dotId(v) << ";\n";
  for (const auto& e : g.edges) {
    os << "  " << dotId(e.from) << " -> " << dotId(e.to);
    if (!e.condition.empty()) os << " [label=" << dotId(toString(e.condition)) << "]";
    os << ";\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace nomwyv
