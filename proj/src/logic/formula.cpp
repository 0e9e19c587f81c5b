#include "scaffold/logic/formula.hpp"

#include <algorithm>
#include <optional>

#include "scaffold/error.hpp"

namespace scaffold::logic {

struct Formula::Node {
  Connective kind;
  char name = 0;
  std::optional<Formula> lhs;
  std::optional<Formula> rhs;
  std::size_t depth = 1;
  std::size_t size = 1;
};

Formula Formula::variable(char name) {
  if (name < 'A' || name > 'Z') {
    throw Error(Errc::InvalidArgument, std::string("variable name must be A-Z, got '") + name + "'");
  }
  auto node = std::make_shared<Node>();
  node->kind = Connective::Variable;
  node->name = name;
  return Formula(std::move(node));
}

Formula Formula::negation(Formula child) {
  auto node = std::make_shared<Node>();
  node->kind = Connective::Not;
  node->depth = child.depth() + 1;
  node->size = child.size() + 1;
  node->lhs = std::move(child);
  return Formula(std::move(node));
}

Formula Formula::binary(Connective op, Formula left, Formula right) {
  if (!is_binary(op)) {
    throw Error(Errc::InvalidArgument, "binary() requires a binary connective");
  }
  auto node = std::make_shared<Node>();
  node->kind = op;
  node->depth = std::max(left.depth(), right.depth()) + 1;
  node->size = left.size() + right.size() + 1;
  node->lhs = std::move(left);
  node->rhs = std::move(right);
  return Formula(std::move(node));
}

Formula Formula::conjunction(Formula l, Formula r) { return binary(Connective::And, std::move(l), std::move(r)); }
Formula Formula::disjunction(Formula l, Formula r) { return binary(Connective::Or, std::move(l), std::move(r)); }
Formula Formula::implication(Formula l, Formula r) { return binary(Connective::Implies, std::move(l), std::move(r)); }
Formula Formula::biconditional(Formula l, Formula r) { return binary(Connective::Iff, std::move(l), std::move(r)); }

Connective Formula::kind() const noexcept { return node_->kind; }

char Formula::name() const {
  if (!is(Connective::Variable)) throw Error(Errc::InvalidArgument, "name() on a compound formula");
  return node_->name;
}

const Formula& Formula::child() const {
  if (!is(Connective::Not)) throw Error(Errc::InvalidArgument, "child() on a non-negation");
  return *node_->lhs;
}

const Formula& Formula::left() const {
  if (!is_binary(kind())) throw Error(Errc::InvalidArgument, "left() on a non-binary formula");
  return *node_->lhs;
}

const Formula& Formula::right() const {
  if (!is_binary(kind())) throw Error(Errc::InvalidArgument, "right() on a non-binary formula");
  return *node_->rhs;
}

std::size_t Formula::depth() const noexcept { return node_->depth; }
std::size_t Formula::size() const noexcept { return node_->size; }

bool operator==(const Formula& a, const Formula& b) noexcept {
  if (a.node_ == b.node_) return true;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (x.kind != y.kind || x.size != y.size) return false;
  switch (x.kind) {
    case Connective::Variable: return x.name == y.name;
    case Connective::Not: return *x.lhs == *y.lhs;
    default: return *x.lhs == *y.lhs && *x.rhs == *y.rhs;
  }
}

bool is_binary(Connective op) noexcept {
  return op == Connective::And || op == Connective::Or || op == Connective::Implies ||
         op == Connective::Iff;
}

namespace {

enum class Tok { Var, Not, And, Or, Implies, Iff, LParen, RParen, End };

struct Token {
  Tok kind;
  std::size_t offset;
  char name = 0;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) { advance(); }

  Formula parse() {
    Formula f = parse_iff();
    if (tok_.kind != Tok::End) fail("unexpected token after formula");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw SyntaxError(tok_.offset, what); }

  void advance() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' ||
                                   text_[pos_] == '\n' || text_[pos_] == '\r')) {
      ++pos_;
    }
    tok_.offset = pos_;
    if (pos_ >= text_.size()) {
      tok_.kind = Tok::End;
      return;
    }
    const char c = text_[pos_];
    if (c >= 'A' && c <= 'Z') {
      tok_ = {Tok::Var, pos_, c};
      ++pos_;
      return;
    }
    switch (c) {
      case '~': tok_.kind = Tok::Not; ++pos_; return;
      case '&': tok_.kind = Tok::And; ++pos_; return;
      case '|': tok_.kind = Tok::Or; ++pos_; return;
      case '(': tok_.kind = Tok::LParen; ++pos_; return;
      case ')': tok_.kind = Tok::RParen; ++pos_; return;
      case '-':
        if (text_.substr(pos_, 2) == "->") {
          tok_.kind = Tok::Implies;
          pos_ += 2;
          return;
        }
        break;
      case '<':
        if (text_.substr(pos_, 3) == "<->") {
          tok_.kind = Tok::Iff;
          pos_ += 3;
          return;
        }
        break;
      default: break;
    }
    throw SyntaxError(pos_, std::string("unexpected character '") + c + "'");
  }

  Formula parse_iff() {
    Formula lhs = parse_implies();
    if (tok_.kind == Tok::Iff) {
      advance();
      return Formula::biconditional(std::move(lhs), parse_iff());
    }
    return lhs;
  }

  Formula parse_implies() {
    Formula lhs = parse_or();
    if (tok_.kind == Tok::Implies) {
      advance();
      return Formula::implication(std::move(lhs), parse_implies());
    }
    return lhs;
  }

  Formula parse_or() {
    Formula lhs = parse_and();
    while (tok_.kind == Tok::Or) {
      advance();
      lhs = Formula::disjunction(std::move(lhs), parse_and());
    }
    return lhs;
  }

  Formula parse_and() {
    Formula lhs = parse_unary();
    while (tok_.kind == Tok::And) {
      advance();
      lhs = Formula::conjunction(std::move(lhs), parse_unary());
    }
    return lhs;
  }

  Formula parse_unary() {
    if (tok_.kind == Tok::Not) {
      advance();
      return Formula::negation(parse_unary());
    }
    return parse_atom();
  }

  Formula parse_atom() {
    if (tok_.kind == Tok::Var) {
      const char name = tok_.name;
      advance();
      return Formula::variable(name);
    }
    if (tok_.kind == Tok::LParen) {
      advance();
      Formula inner = parse_iff();
      if (tok_.kind != Tok::RParen) fail("expected ')'");
      advance();
      return inner;
    }
    fail(tok_.kind == Tok::End ? "unexpected end of input" : "expected a variable or '('");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  Token tok_{Tok::End, 0};
};

int precedence(Connective op) {
  switch (op) {
    case Connective::Iff: return 1;
    case Connective::Implies: return 2;
    case Connective::Or: return 3;
    case Connective::And: return 4;
    case Connective::Not: return 5;
    case Connective::Variable: return 6;
  }
  return 0;
}

bool right_associative(Connective op) {
  return op == Connective::Implies || op == Connective::Iff;
}

std::string_view symbol(Connective op) {
  switch (op) {
    case Connective::And: return " & ";
    case Connective::Or: return " | ";
    case Connective::Implies: return " -> ";
    case Connective::Iff: return " <-> ";
    default: return "";
  }
}

void render_into(const Formula& f, std::string& out, bool full) {
  switch (f.kind()) {
    case Connective::Variable:
      out += f.name();
      return;
    case Connective::Not: {
      out += '~';
      const bool paren = is_binary(f.child().kind());
      if (paren) out += '(';
      render_into(f.child(), out, full);
      if (paren) out += ')';
      return;
    }
    default: break;
  }
  const int p = precedence(f.kind());
  const bool rassoc = right_associative(f.kind());
  auto side = [&](const Formula& sub, bool is_left) {
    bool paren = false;
    if (is_binary(sub.kind())) {
      const int q = precedence(sub.kind());
      paren = full || q < p || (q == p && (is_left ? rassoc : !rassoc));
    }
    if (paren) out += '(';
    render_into(sub, out, full);
    if (paren) out += ')';
  };
  side(f.left(), true);
  out += symbol(f.kind());
  side(f.right(), false);
}

void collect(const Formula& f, std::set<char>& out) {
  switch (f.kind()) {
    case Connective::Variable: out.insert(f.name()); return;
    case Connective::Not: collect(f.child(), out); return;
    default:
      collect(f.left(), out);
      collect(f.right(), out);
  }
}

}  // namespace

Formula parse_formula(std::string_view text) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    throw Error(Errc::EmptyInput, "formula text is blank");
  }
  return Parser(text).parse();
}

std::string render(const Formula& f) {
  std::string out;
  render_into(f, out, false);
  return out;
}

std::string render_full(const Formula& f) {
  std::string out;
  render_into(f, out, true);
  return out;
}

std::set<char> variables(const Formula& f) {
  std::set<char> out;
  collect(f, out);
  return out;
}

bool evaluate(const Formula& f, const Assignment& a) {
  switch (f.kind()) {
    case Connective::Variable: return a[static_cast<std::size_t>(f.name() - 'A')];
    case Connective::Not: return !evaluate(f.child(), a);
    case Connective::And: return evaluate(f.left(), a) && evaluate(f.right(), a);
    case Connective::Or: return evaluate(f.left(), a) || evaluate(f.right(), a);
    case Connective::Implies: return !evaluate(f.left(), a) || evaluate(f.right(), a);
    case Connective::Iff: return evaluate(f.left(), a) == evaluate(f.right(), a);
  }
  return false;
}

}  // namespace scaffold::logic
