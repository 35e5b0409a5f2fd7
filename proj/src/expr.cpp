#include "forelli/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

#include "forelli/errors.hpp"

namespace forelli {

VariableTable VariableTable::coordinates(int n) {
  VariableTable t;
  std::vector<int> all;
  for (int k = 1; k <= n; ++k) {
    t.scalars.push_back("z" + std::to_string(k));
    all.push_back(k - 1);
  }
  t.vectors["z"] = all;
  t.indexed_prefix = "z";
  t.indexed_count = n;
  return t;
}

VariableTable VariableTable::pencil(int n) {
  VariableTable t;
  t.scalars.push_back("l");
  std::vector<int> all;
  for (int k = 1; k <= n; ++k) {
    t.scalars.push_back("u" + std::to_string(k));
    all.push_back(k);
  }
  t.vectors["u"] = all;
  t.indexed_prefix = "u";
  t.indexed_count = n;
  return t;
}

int VariableTable::slot(std::string_view name) const {
  for (std::size_t k = 0; k < scalars.size(); ++k)
    if (scalars[k] == name) return static_cast<int>(k);
  return -1;
}

namespace {

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  Complex value{};
  int line = 1;
  int column = 1;
};

class Lexer {
public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_space();
    Token t;
    t.line = line_;
    t.column = column_;
    if (pos_ >= src_.size()) return t;
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && pos_ + 1 < src_.size() &&
                                                        std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))))
      return number(t);
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        advance();
      t.kind = Tok::Ident;
      t.text = std::string(src_.substr(start, pos_ - start));
      return t;
    }
    advance();
    t.text = std::string(1, c);
    switch (c) {
      case '+': t.kind = Tok::Plus; break;
      case '-': t.kind = Tok::Minus; break;
      case '*': t.kind = Tok::Star; break;
      case '/': t.kind = Tok::Slash; break;
      case '^': t.kind = Tok::Caret; break;
      case '(': t.kind = Tok::LParen; break;
      case ')': t.kind = Tok::RParen; break;
      default: throw ParseError(std::string("unexpected character '") + c + "'", t.line, t.column);
    }
    return t;
  }

private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) advance();
  }

  bool digit_at(std::size_t p) const {
    return p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]));
  }

  Token number(Token t) {
    std::size_t start = pos_;
    while (digit_at(pos_)) advance();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      advance();
      while (digit_at(pos_)) advance();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
      if (digit_at(p)) {
        while (pos_ < p) advance();
        while (digit_at(pos_)) advance();
      }
    }
    const std::string_view digits = src_.substr(start, pos_ - start);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || !std::isfinite(v))
      throw ParseError("malformed number '" + std::string(digits) + "'", t.line, t.column);
    t.kind = Tok::Number;
    t.value = v;
    // A trailing 'i' not followed by an identifier character marks an imaginary literal.
    if (pos_ < src_.size() && src_[pos_] == 'i' &&
        !(pos_ + 1 < src_.size() &&
          (std::isalnum(static_cast<unsigned char>(src_[pos_ + 1])) || src_[pos_ + 1] == '_'))) {
      advance();
      t.value = Complex(0.0, v);
    }
    t.text = std::string(src_.substr(start, pos_ - start));
    return t;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

}  // namespace

class ExprParser {
public:
  ExprParser(std::string_view text, const VariableTable& vars) : lex_(text), vars_(vars) {
    tok_ = lex_.next();
  }

  Expr run() {
    int root = expr();
    if (tok_.kind != Tok::End) fail("unexpected token '" + tok_.text + "'");
    (void)root;
    return Expr(std::move(nodes_), vars_.size());
  }

private:
  using Node = Expr::Node;
  using Op = Expr::Op;

  [[noreturn]] void fail(const std::string& msg) const {
    if (tok_.kind == Tok::End) throw ParseError(msg.empty() ? "unexpected end of input" : msg + " (end of input)", tok_.line, tok_.column);
    throw ParseError(msg, tok_.line, tok_.column);
  }

  void eat() { tok_ = lex_.next(); }

  void expect(Tok kind, const char* what) {
    if (tok_.kind != kind) {
      if (tok_.kind == Tok::End) fail(std::string("expected ") + what + " but reached end of input");
      fail(std::string("expected ") + what + " but found '" + tok_.text + "'");
    }
    eat();
  }

  int push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  int binary(Op op, int lhs, int rhs) {
    Node n;
    n.op = op;
    n.lhs = lhs;
    n.rhs = rhs;
    return push(std::move(n));
  }

  int unary_node(Op op, int arg) {
    Node n;
    n.op = op;
    n.lhs = arg;
    return push(std::move(n));
  }

  int expr() {
    int lhs = term();
    while (tok_.kind == Tok::Plus || tok_.kind == Tok::Minus) {
      const Op op = tok_.kind == Tok::Plus ? Op::Add : Op::Sub;
      eat();
      lhs = binary(op, lhs, term());
    }
    return lhs;
  }

  int term() {
    int lhs = unary();
    while (tok_.kind == Tok::Star || tok_.kind == Tok::Slash) {
      const Op op = tok_.kind == Tok::Star ? Op::Mul : Op::Div;
      eat();
      lhs = binary(op, lhs, unary());
    }
    return lhs;
  }

  int unary() {
    if (tok_.kind == Tok::Minus) {
      eat();
      return unary_node(Op::Neg, unary());
    }
    if (tok_.kind == Tok::Plus) {
      eat();
      return unary();
    }
    return power();
  }

  int power() {
    int base = primary();
    if (tok_.kind != Tok::Caret) return base;
    eat();
    bool negative = false;
    if (tok_.kind == Tok::Minus) {
      negative = true;
      eat();
    } else if (tok_.kind == Tok::LParen) {
      // Allow z^(-2) as well as z^-2.
      eat();
      if (tok_.kind == Tok::Minus) {
        negative = true;
        eat();
      }
      int e = integer_exponent();
      expect(Tok::RParen, "')'");
      return pow_node(base, negative ? -e : e);
    }
    int e = integer_exponent();
    return pow_node(base, negative ? -e : e);
  }

  int integer_exponent() {
    if (tok_.kind != Tok::Number || tok_.value.imag() != 0.0 ||
        tok_.value.real() != std::floor(tok_.value.real()) || tok_.text.find_first_of(".eE") != std::string::npos)
      fail("exponent must be an integer literal");
    const double v = tok_.value.real();
    if (v > 1e6) fail("exponent too large");
    eat();
    return static_cast<int>(v);
  }

  int pow_node(int base, int exponent) {
    Node n;
    n.op = Op::Pow;
    n.lhs = base;
    n.exponent = exponent;
    return push(std::move(n));
  }

  int primary() {
    if (tok_.kind == Tok::Number) {
      Node n;
      n.op = Op::Const;
      n.value = tok_.value;
      eat();
      return push(std::move(n));
    }
    if (tok_.kind == Tok::LParen) {
      eat();
      int inner = expr();
      expect(Tok::RParen, "')'");
      return inner;
    }
    if (tok_.kind == Tok::Ident) return identifier();
    if (tok_.kind == Tok::End) fail("unexpected end of input");
    fail("unexpected token '" + tok_.text + "'");
  }

  int identifier() {
    const Token id = tok_;
    eat();
    static const std::array<std::pair<const char*, Op>, 4> calls{
        {{"conj", Op::Conj}, {"re", Op::Re}, {"im", Op::Im}, {"exp", Op::Exp}}};
    for (const auto& [name, op] : calls) {
      if (id.text == name) {
        expect(Tok::LParen, "'(' after function name");
        int arg = expr();
        expect(Tok::RParen, "')'");
        return unary_node(op, arg);
      }
    }
    if (id.text == "normsq") {
      expect(Tok::LParen, "'(' after normsq");
      if (tok_.kind != Tok::Ident) fail("normsq expects a vector symbol");
      auto it = vars_.vectors.find(tok_.text);
      if (it == vars_.vectors.end()) fail("unknown vector symbol '" + tok_.text + "'");
      Node n;
      n.op = Op::NormSq;
      n.slots = it->second;
      n.name = tok_.text;
      eat();
      expect(Tok::RParen, "')'");
      return push(std::move(n));
    }
    if (id.text == "i") {
      Node n;
      n.value = Complex(0.0, 1.0);
      return push(std::move(n));
    }
    if (id.text == "pi") {
      Node n;
      n.value = 3.14159265358979323846;
      return push(std::move(n));
    }
    const int slot = vars_.slot(id.text);
    if (slot >= 0) {
      Node n;
      n.op = Op::Var;
      n.slot = slot;
      n.name = id.text;
      return push(std::move(n));
    }
    if (!vars_.indexed_prefix.empty() && id.text.rfind(vars_.indexed_prefix, 0) == 0 &&
        id.text.size() > vars_.indexed_prefix.size()) {
      const std::string rest = id.text.substr(vars_.indexed_prefix.size());
      if (std::all_of(rest.begin(), rest.end(), [](unsigned char c) { return std::isdigit(c); }))
        throw ParseError("variable '" + id.text + "' outside declared range " +
                             vars_.indexed_prefix + "1.." + vars_.indexed_prefix +
                             std::to_string(vars_.indexed_count),
                         id.line, id.column);
    }
    throw ParseError("unknown identifier '" + id.text + "'", id.line, id.column);
  }

  Lexer lex_;
  const VariableTable& vars_;
  Token tok_;
  std::vector<Node> nodes_;
};

Expr Expr::parse(std::string_view text, const VariableTable& vars) {
  return ExprParser(text, vars).run();
}

Expr Expr::parse(std::string_view text, int n) { return parse(text, VariableTable::coordinates(n)); }

namespace {

Complex int_power(Complex base, int e) {
  Complex result = 1.0;
  Complex b = base;
  unsigned m = static_cast<unsigned>(e);
  while (m) {
    if (m & 1u) result *= b;
    b *= b;
    m >>= 1u;
  }
  return result;
}

}  // namespace

Complex Expr::eval(const Point& args) const {
  if (args.size() != arity_)
    throw DimensionMismatch("expression expects " + std::to_string(arity_) + " arguments, got " +
                            std::to_string(args.size()));
  constexpr std::size_t kInline = 64;
  std::array<Complex, kInline> small;
  std::vector<Complex> large;
  Complex* v = small.data();
  if (nodes_.size() > kInline) {
    large.resize(nodes_.size());
    v = large.data();
  }
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const Node& n = nodes_[k];
    switch (n.op) {
      case Op::Const: v[k] = n.value; break;
      case Op::Var: v[k] = args[n.slot]; break;
      case Op::Neg: v[k] = -v[n.lhs]; break;
      case Op::Add: v[k] = v[n.lhs] + v[n.rhs]; break;
      case Op::Sub: v[k] = v[n.lhs] - v[n.rhs]; break;
      case Op::Mul: v[k] = v[n.lhs] * v[n.rhs]; break;
      case Op::Div:
        if (v[n.rhs] == Complex(0.0)) throw EvalError("division by zero", to_string(n.rhs));
        v[k] = v[n.lhs] / v[n.rhs];
        break;
      case Op::Pow:
        if (n.exponent >= 0) {
          v[k] = int_power(v[n.lhs], n.exponent);
        } else {
          if (v[n.lhs] == Complex(0.0)) throw EvalError("division by zero", to_string(n.lhs));
          v[k] = 1.0 / int_power(v[n.lhs], -n.exponent);
        }
        break;
      case Op::Conj: v[k] = std::conj(v[n.lhs]); break;
      case Op::Re: v[k] = v[n.lhs].real(); break;
      case Op::Im: v[k] = v[n.lhs].imag(); break;
      case Op::Exp: v[k] = std::exp(v[n.lhs]); break;
      case Op::NormSq: {
        double s = 0.0;
        for (int slot : n.slots) s += std::norm(args[slot]);
        v[k] = s;
        break;
      }
    }
  }
  return v[nodes_.size() - 1];
}

namespace {

std::string format_constant(Complex c) {
  if (c.imag() == 0.0) return "(" + format_double(c.real()) + ")";
  if (c.real() == 0.0) return "(" + format_double(c.imag()) + "i)";
  std::string im = format_double(std::abs(c.imag()));
  return "(" + format_double(c.real()) + (c.imag() < 0 ? "-" : "+") + im + "i)";
}

}  // namespace

std::string Expr::to_string(int node) const {
  const Node& n = nodes_.at(node);
  auto sub = [this](int k) { return to_string(k); };
  switch (n.op) {
    case Op::Const: return format_constant(n.value);
    case Op::Var: return n.name;
    case Op::Neg: return "(-" + sub(n.lhs) + ")";
    case Op::Add: return "(" + sub(n.lhs) + "+" + sub(n.rhs) + ")";
    case Op::Sub: return "(" + sub(n.lhs) + "-" + sub(n.rhs) + ")";
    case Op::Mul: return "(" + sub(n.lhs) + "*" + sub(n.rhs) + ")";
    case Op::Div: return "(" + sub(n.lhs) + "/" + sub(n.rhs) + ")";
    case Op::Pow: return "(" + sub(n.lhs) + "^(" + std::to_string(n.exponent) + "))";
    case Op::Conj: return "conj(" + sub(n.lhs) + ")";
    case Op::Re: return "re(" + sub(n.lhs) + ")";
    case Op::Im: return "im(" + sub(n.lhs) + ")";
    case Op::Exp: return "exp(" + sub(n.lhs) + ")";
    case Op::NormSq: return "normsq(" + n.name + ")";
  }
  return {};
}

std::string Expr::to_string() const { return to_string(static_cast<int>(nodes_.size()) - 1); }

ScalarField Expr::field() const {
  return [e = *this](const Point& z) { return e.eval(z); };
}

}  // namespace forelli
