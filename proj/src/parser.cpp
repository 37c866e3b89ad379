#include "nomwyv/parser.hpp"

#include <cctype>
#include <set>

namespace nomwyv {
namespace {

enum class Tok { Ident, Loc, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::uint32_t line = 1;
  std::uint32_t col = 1;
  SourceSpan span() const { return SourceSpan{line, col, static_cast<std::uint32_t>(text.size())}; }
};

const std::set<std::string> kKeywords = {"name", "subtype", "type", "val", "def", "new",
                                         "let",  "in",      "assert", "Top", "Bot"};

class Lexer {
 public:
  Lexer(const std::string& text, const std::string& file, std::vector<Diagnostic>& diags)
      : s_(text), file_(file), diags_(diags) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skipTrivia();
      Token t;
      t.line = line_;
      t.col = col_;
      if (i_ >= s_.size()) {
        t.kind = Tok::End;
        out.push_back(t);
        return out;
      }
      char c = s_[i_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        size_t j = i_;
        while (j < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_')) ++j;
        t.kind = Tok::Ident;
        t.text = s_.substr(i_, j - i_);
        advance(j - i_);
      } else if (c == '#') {
        size_t j = i_ + 1;
        while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j;
        if (j == i_ + 1) {
          unknown("'#' must be followed by a location number");
          continue;
        }
        t.kind = Tok::Loc;
        t.text = s_.substr(i_, j - i_);
        advance(j - i_);
      } else if (auto p = punct(); !p.empty()) {
        t.kind = Tok::Punct;
        t.text = p;
        advance(p.size());
      } else if (c == '$') {
        unknown("'$' is reserved for generated names and may not appear in identifiers");
        continue;
      } else {
        unknown(std::string("unknown character '") + printable(c) + "'");
        continue;
      }
      out.push_back(std::move(t));
    }
  }

 private:
  static std::string printable(char c) {
    auto u = static_cast<unsigned char>(c);
    if (u < 0x20 || u >= 0x7f) {
      static const char* hex = "0123456789abcdef";
      return std::string("\\x") + hex[u >> 4] + hex[u & 15];
    }
    return std::string(1, c);
  }

  void unknown(const std::string& msg) {
    diags_.push_back(Diagnostic{file_, SourceSpan{line_, col_, 1}, Severity::Error, "E0101", msg});
    // skip one UTF-8 sequence so one character yields one diagnostic
    size_t n = 1;
    while (i_ + n < s_.size() && (static_cast<unsigned char>(s_[i_ + n]) & 0xC0) == 0x80) ++n;
    advance(n);
  }

  std::string punct() const {
    static const char* multi[] = {"</:", "=>", "<=", ">=", "<:", "->"};
    for (const char* m : multi)
      if (s_.compare(i_, std::char_traits<char>::length(m), m) == 0) return m;
    char c = s_[i_];
    if (std::string("{}().,;:=@").find(c) != std::string::npos) return std::string(1, c);
    return {};
  }

  void skipTrivia() {
    while (i_ < s_.size()) {
      char c = s_[i_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance(1);
      } else if (c == '/' && i_ + 1 < s_.size() && s_[i_ + 1] == '/') {
        while (i_ < s_.size() && s_[i_] != '\n') advance(1);
      } else {
        return;
      }
    }
  }

  void advance(size_t n) {
    for (size_t k = 0; k < n && i_ < s_.size(); ++k, ++i_) {
      if (s_[i_] == '\n') {
        ++line_;
        col_ = 1;
      } else if ((static_cast<unsigned char>(s_[i_]) & 0xC0) != 0x80) {
        ++col_;
      }
    }
  }

  const std::string& s_;
  const std::string& file_;
  std::vector<Diagnostic>& diags_;
  size_t i_ = 0;
  std::uint32_t line_ = 1;
  std::uint32_t col_ = 1;
};

struct ParseFail {};

class Parser {
 public:
  Parser(std::vector<Token> toks, const std::string& file, std::vector<Diagnostic>& diags)
      : t_(std::move(toks)), file_(file), diags_(diags) {}

  void parseFile(ParseResult& out, bool allowMain) {
    std::set<std::string> names;
    while (!at(Tok::End)) {
      try {
        if (isKw("assert")) {
          out.asserts.push_back(parseAssert());
        } else if (isKw("name") || isKw("subtype") || isPunct("@")) {
          if (out.program.main) fail(peek(), "declarations must precede the main expression", "E0102");
          TopDecl d = parseTopDecl();
          if (d.kind == TopDecl::Kind::Named && !names.insert(d.name).second)
            error(d.span, "duplicate type name '" + d.name + "'", "E0104");
          out.program.decls.push_back(std::move(d));
        } else if (!out.program.main) {
          if (!allowMain) fail(peek(), "prelude files may not contain a main expression", "E0102");
          failedMain_ = true;
          out.program.main = parseExpr();
          failedMain_ = false;
        } else {
          fail(peek(), "unexpected '" + peek().text + "' after the main expression", "E0102");
        }
      } catch (const ParseFail&) {
        resync();
      }
    }
    if (allowMain && !out.program.main && !failedMain_)
      error(peek().span(), "missing main expression", "E0107");
  }

  std::optional<Type> parseStandaloneType() {
    try {
      Type ty = parseType();
      if (!at(Tok::End)) fail(peek(), "unexpected '" + peek().text + "' after type", "E0102");
      return ty;
    } catch (const ParseFail&) {
      return std::nullopt;
    }
  }

 private:
  const Token& peek(size_t k = 0) const { return t_[std::min(p_ + k, t_.size() - 1)]; }
  bool at(Tok k) const { return peek().kind == k; }
  bool isKw(const char* kw, size_t k = 0) const {
    return peek(k).kind == Tok::Ident && peek(k).text == kw;
  }
  bool isPunct(const char* p, size_t k = 0) const {
    return peek(k).kind == Tok::Punct && peek(k).text == p;
  }
  Token next() {
    Token t = peek();
    if (p_ < t_.size() - 1) ++p_;
    return t;
  }

  void error(SourceSpan sp, const std::string& msg, const std::string& code) {
    diags_.push_back(Diagnostic{file_, sp, Severity::Error, code, msg});
  }

  [[noreturn]] void fail(const Token& t, const std::string& msg, const std::string& code) {
    error(t.span(), msg, code);
    throw ParseFail{};
  }

  std::string describe(const Token& t) const {
    if (t.kind == Tok::End) return "end of input";
    return "'" + t.text + "'";
  }

  void expectPunct(const char* p) {
    if (!isPunct(p)) fail(peek(), std::string("expected '") + p + "' but found " + describe(peek()), "E0102");
    next();
  }

  void expectKw(const char* kw) {
    if (!isKw(kw)) fail(peek(), std::string("expected '") + kw + "' but found " + describe(peek()), "E0102");
    next();
  }

  std::string ident(const char* what) {
    if (!at(Tok::Ident) || kKeywords.count(peek().text))
      fail(peek(), std::string("expected ") + what + " but found " + describe(peek()), "E0102");
    return next().text;
  }

  void resync() {
    // per-declaration recovery: skip to the next top-level keyword
    if (p_ < t_.size() - 1) ++p_;
    while (!at(Tok::End) && !isKw("name") && !isKw("subtype") && !isKw("assert") &&
           !(isPunct("@") && isKw("shape", 1) && isKw("name", 2)))
      next();
  }

  void skipSeparators() {
    while (isPunct(";") || isPunct(",")) next();
  }

  Bound parseBound() {
    if (isPunct("<=")) { next(); return Bound::LE; }
    if (isPunct(">=")) { next(); return Bound::GE; }
    if (isPunct("=")) { next(); return Bound::EQ; }
    fail(peek(), "expected a bound ('<=', '>=' or '=') but found " + describe(peek()), "E0102");
  }

  ShapeMark parseMark() {
    if (!isPunct("@")) return ShapeMark::Material;
    next();
    if (!isKw("shape")) fail(peek(), "expected 'shape' after '@'", "E0102");
    next();
    return ShapeMark::Shape;
  }

  // '{' starts an object body rather than a refinement when followed by `x =>`.
  bool refinementAhead() const {
    if (!isPunct("{")) return false;
    return !(peek(1).kind == Tok::Ident && isPunct("=>", 2));
  }

  Path parsePathToken() {
    if (at(Tok::Loc)) {
      Token t = next();
      error(t.span(), "store locations are an intermediate form and may not appear in source", "E0105");
      return Path::mkLoc(std::stoull(t.text.substr(1)));
    }
    return Path::mkVar(ident("a variable"));
  }

  Refinement parseRefinement() {
    expectPunct("{");
    Refinement r;
    skipSeparators();
    while (!isPunct("}")) {
      if (isKw("type")) next();
      Token lt = peek();
      std::string label = ident("a type member label");
      Bound b = parseBound();
      Type ty = parseType();
      if (r.find(label)) error(lt.span(), "duplicate refinement label '" + label + "'", "E0106");
      r.members.push_back(RefinementMember{label, b, std::move(ty)});
      skipSeparators();
    }
    next();
    return r;
  }

  Type parseType() {
    if (isKw("Top")) { next(); return Type::top(); }
    if (isKw("Bot")) { next(); return Type::bottom(); }
    Type ty;
    if (at(Tok::Loc) || (at(Tok::Ident) && isPunct(".", 1))) {
      Path p = parsePathToken();
      expectPunct(".");
      ty = Type::pathSel(p, ident("a type member label"));
    } else {
      ty = Type::named(ident("a type"));
    }
    if (refinementAhead()) ty.refinement = parseRefinement();
    return ty;
  }

  std::vector<Param> parseParams() {
    expectPunct("(");
    std::vector<Param> ps;
    while (!isPunct(")")) {
      std::string x = ident("a parameter name");
      expectPunct(":");
      ps.push_back(Param{x, parseType()});
      if (!isPunct(")")) expectPunct(",");
    }
    next();
    return ps;
  }

  // def f(x: T, ...): R    or the alias    def f : T x -> R
  void parseSignature(std::vector<Param>& params, Type& result) {
    if (isPunct("(")) {
      params = parseParams();
      expectPunct(":");
      result = parseType();
    } else {
      expectPunct(":");
      Type pt = parseType();
      std::string x = ident("a parameter name");
      expectPunct("->");
      params = {Param{x, pt}};
      result = parseType();
    }
  }

  MemberDecl parseMemberDecl() {
    Token start = peek();
    ShapeMark mark = parseMark();
    MemberDecl d;
    d.span = start.span();
    if (isKw("type")) {
      next();
      d.kind = MemberDecl::Kind::TypeMember;
      d.mark = mark;
      d.label = ident("a type member label");
      d.bound = parseBound();
      d.ty = parseType();
    } else if (mark == ShapeMark::Shape) {
      fail(peek(), "'@shape' applies only to names and type members", "E0102");
    } else if (isKw("val")) {
      next();
      d.kind = MemberDecl::Kind::Field;
      d.label = ident("a field name");
      expectPunct(":");
      d.ty = parseType();
    } else if (isKw("def")) {
      next();
      d.kind = MemberDecl::Kind::Method;
      d.label = ident("a method name");
      parseSignature(d.params, d.resultTy);
    } else {
      fail(peek(), "expected a member declaration but found " + describe(peek()), "E0102");
    }
    return d;
  }

  TopDecl parseTopDecl() {
    Token start = peek();
    TopDecl d;
    d.span = start.span();
    if (isKw("subtype")) {
      next();
      d.kind = TopDecl::Kind::Subtype;
      d.lhsName = ident("a type name");
      if (isPunct("{")) d.lhsRefinement = parseRefinement();
      expectPunct("<:");
      d.rhsName = ident("a type name");
      return d;
    }
    d.kind = TopDecl::Kind::Named;
    d.mark = parseMark();
    expectKw("name");
    Token nt = peek();
    d.name = ident("a type name");
    d.span = nt.span();
    expectPunct("{");
    d.selfVar = ident("a self variable");
    expectPunct("=>");
    std::set<std::string> labels;
    skipSeparators();
    while (!isPunct("}")) {
      MemberDecl m = parseMemberDecl();
      if (!labels.insert(m.label).second)
        error(m.span, "duplicate member label '" + m.label + "' in '" + d.name + "'", "E0106");
      d.members.push_back(std::move(m));
      skipSeparators();
    }
    next();
    return d;
  }

  AssertDirective parseAssert() {
    Token start = next();
    AssertDirective a;
    a.span = start.span();
    a.lhs = parseType();
    if (isPunct("<:")) {
      a.expected = true;
    } else if (isPunct("</:")) {
      a.expected = false;
    } else {
      fail(peek(), "expected '<:' or '</:' in assert", "E0102");
    }
    next();
    a.rhs = parseType();
    return a;
  }

  ObjMemberDefn parseDefn() {
    Token start = peek();
    ObjMemberDefn d;
    d.span = start.span();
    if (isKw("type")) {
      next();
      d.kind = ObjMemberDefn::Kind::TypeMember;
      d.label = ident("a type member label");
      if (!isPunct("=")) fail(peek(), "type member definitions must use '='", "E0102");
      next();
      d.ty = parseType();
    } else if (isKw("val")) {
      next();
      d.kind = ObjMemberDefn::Kind::Field;
      d.label = ident("a field name");
      expectPunct(":");
      d.ty = parseType();
      expectPunct("=");
      d.value = parseExpr();
    } else if (isKw("def")) {
      next();
      d.kind = ObjMemberDefn::Kind::Method;
      d.label = ident("a method name");
      parseSignature(d.params, d.resultTy);
      expectPunct("=");
      d.body = parseExpr();
    } else {
      fail(peek(), "expected a member definition but found " + describe(peek()), "E0102");
    }
    return d;
  }

  ExprPtr parsePrimary() {
    Token start = peek();
    if (isKw("new")) {
      next();
      Type ty = parseType();
      expectPunct("{");
      std::string self = ident("a self variable");
      expectPunct("=>");
      std::vector<ObjMemberDefn> defs;
      std::set<std::string> labels;
      skipSeparators();
      while (!isPunct("}")) {
        ObjMemberDefn d = parseDefn();
        if (!labels.insert(d.label).second)
          error(d.span, "duplicate member label '" + d.label + "'", "E0106");
        defs.push_back(std::move(d));
        skipSeparators();
      }
      next();
      return mkNew(std::move(ty), self, std::move(defs), start.span());
    }
    if (isPunct("(")) {
      next();
      ExprPtr e = parseExpr();
      expectPunct(")");
      return e;
    }
    if (at(Tok::Loc) || (at(Tok::Ident) && !kKeywords.count(peek().text)))
      return mkPath(parsePathToken(), start.span());
    fail(peek(), "expected an expression but found " + describe(peek()), "E0102");
  }

  ExprPtr parsePostfix() {
    ExprPtr e = parsePrimary();
    while (isPunct(".")) {
      next();
      Token lt = peek();
      std::string label = ident("a member name");
      if (isPunct("(")) {
        next();
        std::vector<ExprPtr> args;
        while (!isPunct(")")) {
          args.push_back(parseExpr());
          if (!isPunct(")")) expectPunct(",");
        }
        next();
        e = mkMethodApp(e, label, std::move(args), lt.span());
      } else {
        e = mkFieldSel(e, label, lt.span());
      }
    }
    return e;
  }

  ExprPtr parseExpr() {
    if (isKw("let")) {
      Token start = next();
      std::string x = ident("a variable");
      std::optional<Type> asc;
      if (isPunct(":")) {
        next();
        asc = parseType();
      }
      expectPunct("=");
      ExprPtr bound = parseExpr();
      expectKw("in");
      ExprPtr body = parseExpr();
      return mkLet(x, std::move(asc), bound, body, start.span());
    }
    return parsePostfix();
  }

  std::vector<Token> t_;
  size_t p_ = 0;
  const std::string& file_;
  std::vector<Diagnostic>& diags_;
  bool failedMain_ = false;
};

ParseResult parseImpl(const SourceFile& src, bool allowMain) {
  ParseResult out;
  Lexer lx(src.text, src.path, out.diagnostics);
  auto toks = lx.run();
  Parser ps(std::move(toks), src.path, out.diagnostics);
  ps.parseFile(out, allowMain);
  if (out.program.main) {
    auto anf = validateAnf(out.program, src.path);
    out.diagnostics.insert(out.diagnostics.end(), anf.begin(), anf.end());
  }
  return out;
}

void anfWalk(const ExprPtr& e, const std::string& file, std::vector<Diagnostic>& out) {
  if (!e) return;
  auto need = [&](const ExprPtr& sub, const char* msg) {
    if (sub && !asPath(sub)) out.push_back(Diagnostic{file, sub->span, Severity::Error, "E0103", msg});
  };
  switch (e->kind) {
    case Expr::Kind::PathE:
      return;
    case Expr::Kind::FieldSel:
      need(e->target, "field selection target must be a path");
      anfWalk(e->target, file, out);
      return;
    case Expr::Kind::MethodApp:
      need(e->target, "method target must be a path");
      anfWalk(e->target, file, out);
      for (const auto& a : e->args) {
        need(a, "argument must be a path");
        anfWalk(a, file, out);
      }
      return;
    case Expr::Kind::New:
      for (const auto& d : e->defs) {
        if (d.kind == ObjMemberDefn::Kind::Field) {
          need(d.value, "field value must be a path");
          anfWalk(d.value, file, out);
        }
        if (d.kind == ObjMemberDefn::Kind::Method) anfWalk(d.body, file, out);
      }
      return;
    case Expr::Kind::Let:
      anfWalk(e->bound, file, out);
      anfWalk(e->body, file, out);
      return;
  }
}

}  // namespace

ParseResult parseProgram(const SourceFile& src) { return parseImpl(src, true); }

ParseResult parseDeclarations(const SourceFile& src) { return parseImpl(src, false); }

std::optional<Type> parseType(const std::string& text, std::vector<Diagnostic>* diags) {
  std::vector<Diagnostic> local;
  std::vector<Diagnostic>& ds = diags ? *diags : local;
  size_t before = ds.size();
  Lexer lx(text, "<type>", ds);
  auto toks = lx.run();
  Parser ps(std::move(toks), "<type>", ds);
  auto ty = ps.parseStandaloneType();
  if (ds.size() != before) return std::nullopt;
  return ty;
}

std::vector<Diagnostic> validateAnf(const Program& p, const std::string& file) {
  std::vector<Diagnostic> out;
  anfWalk(p.main, file, out);
  return out;
}

}  // namespace nomwyv
