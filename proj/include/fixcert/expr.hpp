#pragma once

// Arithmetic expression language for maps of one real variable.
// Grammar (EBNF in the README): decimals, + - * / ^, unary minus,
// the functions sqrt/ln/exp/abs/min/max/pow, constants e and pi,
// and a single free variable spelled `x`.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace fixcert {

enum class TokenKind { Number, Identifier, Operator, LeftParen, RightParen, Comma };

struct Token {
  TokenKind kind;
  std::string lexeme;
  std::size_t position = 0;  // 0-based character offset into the source
};

/// Lexical or syntactic failure, carrying the source offset.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : std::runtime_error(message + " (offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

inline std::vector<Token> tokenize(std::string_view source) {
  if (source.empty()) throw ParseError("empty expression", 0);

  std::vector<Token> tokens;
  std::size_t i = 0;
  const std::size_t n = source.size();

  auto is_digit = [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; };
  auto is_alpha = [](char c) {
    return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_';
  };

  while (i < n) {
    const char c = source[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (is_digit(c)) {
      while (i < n && is_digit(source[i])) ++i;
      if (i < n && source[i] == '.') {
        if (i + 1 >= n || !is_digit(source[i + 1]))
          throw ParseError("malformed number literal", start);
        ++i;
        while (i < n && is_digit(source[i])) ++i;
      }
      // Exponent part only when it is unambiguously one; otherwise the
      // 'e' is left for the identifier lexer (Euler constant).
      if (i < n && (source[i] == 'e' || source[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < n && (source[j] == '+' || source[j] == '-')) ++j;
        if (j < n && is_digit(source[j])) {
          i = j;
          while (i < n && is_digit(source[i])) ++i;
        }
      }
      tokens.push_back({TokenKind::Number, std::string(source.substr(start, i - start)), start});
      continue;
    }
    if (is_alpha(c)) {
      while (i < n && (is_alpha(source[i]) || is_digit(source[i]))) ++i;
      tokens.push_back({TokenKind::Identifier, std::string(source.substr(start, i - start)), start});
      continue;
    }
    switch (c) {
      case '+':
      case '-':
      case '*':
      case '/':
      case '^':
        tokens.push_back({TokenKind::Operator, std::string(1, c), start});
        break;
      case '(':
        tokens.push_back({TokenKind::LeftParen, "(", start});
        break;
      case ')':
        tokens.push_back({TokenKind::RightParen, ")", start});
        break;
      case ',':
        tokens.push_back({TokenKind::Comma, ",", start});
        break;
      default:
        throw ParseError(std::string("unknown character '") + c + "'", start);
    }
    ++i;
  }
  return tokens;
}

enum class UnaryOp { Negate };
enum class BinaryOp { Add, Subtract, Multiply, Divide, Power };
enum class Builtin { Sqrt, Ln, Exp, Abs, Min, Max, Pow };

inline constexpr std::size_t builtin_arity(Builtin fn) {
  switch (fn) {
    case Builtin::Sqrt:
    case Builtin::Ln:
    case Builtin::Exp:
    case Builtin::Abs:
      return 1;
    case Builtin::Min:
    case Builtin::Max:
    case Builtin::Pow:
      return 2;
  }
  return 0;
}

inline constexpr const char* builtin_name(Builtin fn) {
  switch (fn) {
    case Builtin::Sqrt: return "sqrt";
    case Builtin::Ln: return "ln";
    case Builtin::Exp: return "exp";
    case Builtin::Abs: return "abs";
    case Builtin::Min: return "min";
    case Builtin::Max: return "max";
    case Builtin::Pow: return "pow";
  }
  return "?";
}

inline std::optional<Builtin> builtin_from_name(std::string_view name) {
  if (name == "sqrt") return Builtin::Sqrt;
  if (name == "ln") return Builtin::Ln;
  if (name == "exp") return Builtin::Exp;
  if (name == "abs") return Builtin::Abs;
  if (name == "min") return Builtin::Min;
  if (name == "max") return Builtin::Max;
  if (name == "pow") return Builtin::Pow;
  return std::nullopt;
}

struct ExprNode;
using ExprPtr = std::unique_ptr<ExprNode>;

struct ExprNode {
  struct Constant {
    double value;
  };
  struct Variable {};
  struct Unary {
    UnaryOp op;
    ExprPtr child;
  };
  struct Binary {
    BinaryOp op;
    ExprPtr left;
    ExprPtr right;
  };
  struct Call {
    Builtin fn;
    std::vector<ExprPtr> args;
  };

  std::variant<Constant, Variable, Unary, Binary, Call> value;
  std::size_t offset = 0;  // source offset of the subexpression
};

namespace detail {

class Parser {
 public:
  explicit Parser(const std::vector<Token>& tokens) : tokens_(tokens) {}

  ExprPtr run() {
    ExprPtr root = expression();
    if (pos_ < tokens_.size())
      throw ParseError("trailing input after expression", tokens_[pos_].position);
    return root;
  }

 private:
  const std::vector<Token>& tokens_;
  std::size_t pos_ = 0;

  const Token* peek() const { return pos_ < tokens_.size() ? &tokens_[pos_] : nullptr; }

  bool at_operator(char op) const {
    const Token* t = peek();
    return t && t->kind == TokenKind::Operator && t->lexeme.size() == 1 && t->lexeme[0] == op;
  }

  const Token& advance() { return tokens_[pos_++]; }

  std::size_t here() const {
    return pos_ < tokens_.size() ? tokens_[pos_].position
                                 : (tokens_.empty() ? 0 : end_offset(tokens_.back()));
  }

  static std::size_t end_offset(const Token& t) { return t.position + t.lexeme.size(); }

  void expect(TokenKind kind, const char* what) {
    const Token* t = peek();
    if (!t || t->kind != kind)
      throw ParseError(std::string("expected ") + what, here());
    ++pos_;
  }

  static ExprPtr make(std::size_t offset, auto&& node) {
    auto p = std::make_unique<ExprNode>();
    p->value = std::forward<decltype(node)>(node);
    p->offset = offset;
    return p;
  }

  ExprPtr expression() { return additive(); }

  ExprPtr additive() {
    ExprPtr lhs = multiplicative();
    for (;;) {
      if (at_operator('+')) {
        const std::size_t off = advance().position;
        lhs = make(off, ExprNode::Binary{BinaryOp::Add, std::move(lhs), multiplicative()});
      } else if (at_operator('-')) {
        const std::size_t off = advance().position;
        lhs = make(off, ExprNode::Binary{BinaryOp::Subtract, std::move(lhs), multiplicative()});
      } else {
        return lhs;
      }
    }
  }

  ExprPtr multiplicative() {
    ExprPtr lhs = power();
    for (;;) {
      if (at_operator('*')) {
        const std::size_t off = advance().position;
        lhs = make(off, ExprNode::Binary{BinaryOp::Multiply, std::move(lhs), power()});
      } else if (at_operator('/')) {
        const std::size_t off = advance().position;
        lhs = make(off, ExprNode::Binary{BinaryOp::Divide, std::move(lhs), power()});
      } else {
        return lhs;
      }
    }
  }

  // '^' is right-associative; unary minus binds tighter than '^'.
  ExprPtr power() {
    ExprPtr base = unary();
    if (at_operator('^')) {
      const std::size_t off = advance().position;
      return make(off, ExprNode::Binary{BinaryOp::Power, std::move(base), power()});
    }
    return base;
  }

  ExprPtr unary() {
    if (at_operator('-')) {
      const std::size_t off = advance().position;
      return make(off, ExprNode::Unary{UnaryOp::Negate, unary()});
    }
    return primary();
  }

  ExprPtr primary() {
    const Token* t = peek();
    if (!t) throw ParseError("expected operand", here());

    if (t->kind == TokenKind::Number) {
      const Token& tok = advance();
      double value = 0;
      const char* first = tok.lexeme.data();
      const char* last = first + tok.lexeme.size();
      auto [ptr, ec] = std::from_chars(first, last, value);
      if (ec != std::errc{} || ptr != last)
        throw ParseError("malformed number literal", tok.position);
      return make(tok.position, ExprNode::Constant{value});
    }

    if (t->kind == TokenKind::Identifier) {
      const Token& tok = advance();
      if (peek() && peek()->kind == TokenKind::LeftParen) {
        const auto fn = builtin_from_name(tok.lexeme);
        if (!fn)
          throw ParseError("unknown function '" + tok.lexeme + "'", tok.position);
        ++pos_;  // '('
        std::vector<ExprPtr> args;
        if (peek() && peek()->kind != TokenKind::RightParen) {
          args.push_back(expression());
          while (peek() && peek()->kind == TokenKind::Comma) {
            ++pos_;
            args.push_back(expression());
          }
        }
        expect(TokenKind::RightParen, "')'");
        if (args.size() != builtin_arity(*fn))
          throw ParseError("function '" + tok.lexeme + "' expects " +
                               std::to_string(builtin_arity(*fn)) + " argument(s), got " +
                               std::to_string(args.size()),
                           tok.position);
        return make(tok.position, ExprNode::Call{*fn, std::move(args)});
      }
      if (tok.lexeme == "x") return make(tok.position, ExprNode::Variable{});
      if (tok.lexeme == "e") return make(tok.position, ExprNode::Constant{std::numbers::e});
      if (tok.lexeme == "pi") return make(tok.position, ExprNode::Constant{std::numbers::pi});
      throw ParseError("unknown identifier '" + tok.lexeme + "'", tok.position);
    }

    if (t->kind == TokenKind::LeftParen) {
      ++pos_;
      ExprPtr inner = expression();
      expect(TokenKind::RightParen, "')'");
      return inner;
    }

    throw ParseError("unexpected token '" + t->lexeme + "'", t->position);
  }
};

}  // namespace detail

inline ExprPtr parse(const std::vector<Token>& tokens) {
  return detail::Parser(tokens).run();
}

/// Evaluation failure: which subexpression (source offset) and why.
struct EvalError {
  std::size_t offset = 0;
  std::string message;
};

/// Value-or-error result of evaluating an expression at a point.
class EvalResult {
 public:
  static EvalResult success(double v) {
    EvalResult r;
    r.value_ = v;
    return r;
  }
  static EvalResult failure(EvalError err) {
    EvalResult r;
    r.error_ = std::move(err);
    return r;
  }

  bool ok() const noexcept { return !error_.has_value(); }
  double value() const { return value_; }
  const EvalError& error() const { return *error_; }

 private:
  double value_ = 0.0;
  std::optional<EvalError> error_;
};

namespace detail {

inline EvalResult eval_node(const ExprNode& node, double x);

struct EvalVisitor {
  double x;
  std::size_t offset;

  EvalResult operator()(const ExprNode::Constant& c) const { return EvalResult::success(c.value); }

  EvalResult operator()(const ExprNode::Variable&) const { return EvalResult::success(x); }

  EvalResult operator()(const ExprNode::Unary& u) const {
    EvalResult child = eval_node(*u.child, x);
    if (!child.ok()) return child;
    return EvalResult::success(-child.value());
  }

  EvalResult operator()(const ExprNode::Binary& b) const {
    EvalResult lhs = eval_node(*b.left, x);
    if (!lhs.ok()) return lhs;
    EvalResult rhs = eval_node(*b.right, x);
    if (!rhs.ok()) return rhs;
    const double l = lhs.value();
    const double r = rhs.value();
    double v = 0;
    switch (b.op) {
      case BinaryOp::Add: v = l + r; break;
      case BinaryOp::Subtract: v = l - r; break;
      case BinaryOp::Multiply: v = l * r; break;
      case BinaryOp::Divide:
        if (r == 0.0) return EvalResult::failure({offset, "division by zero"});
        v = l / r;
        break;
      case BinaryOp::Power: v = std::pow(l, r); break;
    }
    if (!std::isfinite(v)) return EvalResult::failure({offset, "non-finite result"});
    return EvalResult::success(v);
  }

  EvalResult operator()(const ExprNode::Call& c) const {
    double args[2] = {0, 0};
    for (std::size_t i = 0; i < c.args.size(); ++i) {
      EvalResult a = eval_node(*c.args[i], x);
      if (!a.ok()) return a;
      args[i] = a.value();
    }
    double v = 0;
    switch (c.fn) {
      case Builtin::Sqrt:
        if (args[0] < 0.0) return EvalResult::failure({offset, "square root of negative value"});
        v = std::sqrt(args[0]);
        break;
      case Builtin::Ln:
        if (args[0] <= 0.0) return EvalResult::failure({offset, "logarithm of non-positive value"});
        v = std::log(args[0]);
        break;
      case Builtin::Exp: v = std::exp(args[0]); break;
      case Builtin::Abs: v = std::abs(args[0]); break;
      case Builtin::Min: v = std::min(args[0], args[1]); break;
      case Builtin::Max: v = std::max(args[0], args[1]); break;
      case Builtin::Pow: v = std::pow(args[0], args[1]); break;
    }
    if (!std::isfinite(v)) return EvalResult::failure({offset, "non-finite result"});
    return EvalResult::success(v);
  }
};

inline EvalResult eval_node(const ExprNode& node, double x) {
  return std::visit(EvalVisitor{x, node.offset}, node.value);
}

}  // namespace detail

/// A parsed, immutable map from reals to reals. Copies share the AST and
/// are safe to evaluate concurrently.
class RealMap {
 public:
  static RealMap parse(std::string source) {
    auto tokens = tokenize(source);
    auto root = fixcert::parse(tokens);
    return RealMap(std::move(source), std::shared_ptr<const ExprNode>(std::move(root)));
  }

  const std::string& source() const noexcept { return source_; }
  const ExprNode& root() const noexcept { return *root_; }

  EvalResult evaluate(double x) const { return detail::eval_node(*root_, x); }
  EvalResult operator()(double x) const { return evaluate(x); }

  bool is_identity() const noexcept {
    return std::holds_alternative<ExprNode::Variable>(root_->value);
  }

 private:
  RealMap(std::string source, std::shared_ptr<const ExprNode> root)
      : source_(std::move(source)), root_(std::move(root)) {}

  std::string source_;
  std::shared_ptr<const ExprNode> root_;
};

inline RealMap identity_map() { return RealMap::parse("x"); }

inline EvalResult evaluate(const RealMap& map, double x) { return map.evaluate(x); }

/// Thrown by callers that need an evaluated value to proceed.
class EvalException : public std::runtime_error {
 public:
  EvalException(EvalError err, const std::string& context)
      : std::runtime_error(context + ": " + err.message + " (offset " +
                           std::to_string(err.offset) + ")"),
        error_(std::move(err)) {}

  const EvalError& error() const noexcept { return error_; }

 private:
  EvalError error_;
};

inline double eval_or_throw(const RealMap& map, double x, const char* role) {
  EvalResult r = map.evaluate(x);
  if (!r.ok())
    throw EvalException(r.error(), std::string(role) + " at x=" + std::to_string(x));
  return r.value();
}

// ---- pretty printing and structural comparison ----

namespace detail {

// Higher binds tighter: add/sub 1, mul/div 2, power 3, unary 4, atoms 5.
inline int precedence_of(const ExprNode& node) {
  struct V {
    int operator()(const ExprNode::Constant&) const { return 5; }
    int operator()(const ExprNode::Variable&) const { return 5; }
    int operator()(const ExprNode::Unary&) const { return 4; }
    int operator()(const ExprNode::Binary& b) const {
      switch (b.op) {
        case BinaryOp::Add:
        case BinaryOp::Subtract: return 1;
        case BinaryOp::Multiply:
        case BinaryOp::Divide: return 2;
        case BinaryOp::Power: return 3;
      }
      return 5;
    }
    int operator()(const ExprNode::Call&) const { return 5; }
  };
  return std::visit(V{}, node.value);
}

inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline void print_node(const ExprNode& node, std::string& out);

inline void print_child(const ExprNode& child, int parent_prec, bool parenthesize_equal,
                        std::string& out) {
  const int prec = precedence_of(child);
  const bool parens = parenthesize_equal ? prec <= parent_prec : prec < parent_prec;
  if (parens) out += '(';
  print_node(child, out);
  if (parens) out += ')';
}

inline void print_node(const ExprNode& node, std::string& out) {
  struct V {
    std::string& out;

    void operator()(const ExprNode::Constant& c) const { out += format_double(c.value); }
    void operator()(const ExprNode::Variable&) const { out += 'x'; }
    void operator()(const ExprNode::Unary& u) const {
      out += '-';
      print_child(*u.child, 4, false, out);
    }
    void operator()(const ExprNode::Binary& b) const {
      const char* op = "";
      int prec = 0;
      bool right_assoc = false;
      switch (b.op) {
        case BinaryOp::Add: op = " + "; prec = 1; break;
        case BinaryOp::Subtract: op = " - "; prec = 1; break;
        case BinaryOp::Multiply: op = "*"; prec = 2; break;
        case BinaryOp::Divide: op = "/"; prec = 2; break;
        case BinaryOp::Power: op = "^"; prec = 3; right_assoc = true; break;
      }
      print_child(*b.left, prec, right_assoc, out);
      out += op;
      print_child(*b.right, prec, !right_assoc, out);
    }
    void operator()(const ExprNode::Call& c) const {
      out += builtin_name(c.fn);
      out += '(';
      for (std::size_t i = 0; i < c.args.size(); ++i) {
        if (i) out += ", ";
        print_node(*c.args[i], out);
      }
      out += ')';
    }
  };
  std::visit(V{out}, node.value);
}

}  // namespace detail

inline std::string to_string(const ExprNode& node) {
  std::string out;
  detail::print_node(node, out);
  return out;
}

inline std::string to_string(const RealMap& map) { return to_string(map.root()); }

inline bool structurally_equal(const ExprNode& a, const ExprNode& b) {
  if (a.value.index() != b.value.index()) return false;
  struct V {
    const ExprNode& other;

    bool operator()(const ExprNode::Constant& c) const {
      return std::get<ExprNode::Constant>(other.value).value == c.value;
    }
    bool operator()(const ExprNode::Variable&) const { return true; }
    bool operator()(const ExprNode::Unary& u) const {
      const auto& o = std::get<ExprNode::Unary>(other.value);
      return o.op == u.op && structurally_equal(*u.child, *o.child);
    }
    bool operator()(const ExprNode::Binary& b) const {
      const auto& o = std::get<ExprNode::Binary>(other.value);
      return o.op == b.op && structurally_equal(*b.left, *o.left) &&
             structurally_equal(*b.right, *o.right);
    }
    bool operator()(const ExprNode::Call& c) const {
      const auto& o = std::get<ExprNode::Call>(other.value);
      if (o.fn != c.fn || o.args.size() != c.args.size()) return false;
      for (std::size_t i = 0; i < c.args.size(); ++i)
        if (!structurally_equal(*c.args[i], *o.args[i])) return false;
      return true;
    }
  };
  return std::visit(V{b}, a.value);
}

}  // namespace fixcert
