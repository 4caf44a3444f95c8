#pragma once

#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "acclab/errors.hpp"
#include "acclab/formula.hpp"
#include "acclab/terms.hpp"

namespace acclab {

// ---------------------------------------------------------------------------
// Tokenizer
// ---------------------------------------------------------------------------

struct Token {
  enum class Type {
    Ident,      // foo, Foo
    PubVar,     // $x
    FreshVar,   // ~x
    TempVar,    // #i
    PubName,    // 'A'
    Number,     // 42
    String,     // "..."
    Symbol,     // punctuation, possibly multi-char: --[  ]->  ==>  <=>
    End,
  };
  Type type = Type::End;
  std::string text;
  std::size_t line = 1;
  std::size_t col = 1;
};

class Tokenizer {
 public:
  Tokenizer(std::string input, std::string file, std::size_t start_line = 1,
            std::size_t start_col = 1)
      : in_(std::move(input)), file_(std::move(file)), line_(start_line),
        col_(start_col) {
    next();
  }

  const Token& peek() const { return tok_; }
  const std::string& file() const { return file_; }

  Token take() {
    Token t = tok_;
    next();
    return t;
  }

  bool at_symbol(const std::string& s) const {
    return tok_.type == Token::Type::Symbol && tok_.text == s;
  }
  bool at_ident(const std::string& s) const {
    return tok_.type == Token::Type::Ident && tok_.text == s;
  }

  bool accept_symbol(const std::string& s) {
    if (!at_symbol(s)) return false;
    next();
    return true;
  }
  bool accept_ident(const std::string& s) {
    if (!at_ident(s)) return false;
    next();
    return true;
  }

  void expect_symbol(const std::string& s) {
    if (!accept_symbol(s)) fail("expected '" + s + "'");
  }
  void expect_ident(const std::string& s) {
    if (!accept_ident(s)) fail("expected '" + s + "'");
  }

  std::string expect_name() {
    if (tok_.type != Token::Type::Ident) fail("expected an identifier");
    return take().text;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    std::string got = tok_.type == Token::Type::End
                          ? "end of input"
                          : "'" + tok_.text + "'";
    throw ParseError(file_, tok_.line, tok_.col, msg + ", got " + got);
  }

 private:
  void next() {
    skip_space();
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= in_.size()) {
      tok_ = Token{Token::Type::End, "", line_, col_};
      return;
    }
    char c = in_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      tok_.type = Token::Type::Ident;
      tok_.text = read_ident();
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      tok_.type = Token::Type::Number;
      tok_.text.clear();
      while (pos_ < in_.size() &&
             std::isdigit(static_cast<unsigned char>(in_[pos_])))
        tok_.text += advance();
      return;
    }
    switch (c) {
      case '$':
        advance();
        tok_.type = Token::Type::PubVar;
        tok_.text = read_ident_or_fail("public variable");
        return;
      case '~':
        advance();
        tok_.type = Token::Type::FreshVar;
        tok_.text = read_ident_or_fail("fresh variable");
        return;
      case '#':
        advance();
        tok_.type = Token::Type::TempVar;
        tok_.text = read_ident_or_fail("temporal variable");
        return;
      case '\'': {
        advance();
        tok_.type = Token::Type::PubName;
        tok_.text.clear();
        while (pos_ < in_.size() && in_[pos_] != '\'') tok_.text += advance();
        if (pos_ >= in_.size())
          throw ParseError(file_, tok_.line, tok_.col,
                           "unterminated public name");
        advance();
        return;
      }
      case '"': {
        advance();
        tok_.type = Token::Type::String;
        tok_.text.clear();
        while (pos_ < in_.size() && in_[pos_] != '"') tok_.text += advance();
        if (pos_ >= in_.size())
          throw ParseError(file_, tok_.line, tok_.col, "unterminated string");
        advance();
        return;
      }
      default:
        break;
    }
    tok_.type = Token::Type::Symbol;
    tok_.text = read_symbol();
  }

  std::string read_ident() {
    std::string s;
    while (pos_ < in_.size()) {
      char c = in_[pos_];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_')
        s += advance();
      else
        break;
    }
    return s;
  }

  std::string read_ident_or_fail(const std::string& what) {
    std::string s = read_ident();
    if (s.empty())
      throw ParseError(file_, line_, col_, "expected a " + what + " name");
    return s;
  }

  std::string read_symbol() {
    static const char* kMulti[] = {"--[", "]->", "==>", "<=>"};
    for (const char* m : kMulti) {
      std::string s(m);
      if (in_.compare(pos_, s.size(), s) == 0) {
        for (std::size_t i = 0; i < s.size(); ++i) advance();
        return s;
      }
    }
    std::string s(1, advance());
    return s;
  }

  void skip_space() {
    for (;;) {
      while (pos_ < in_.size() &&
             std::isspace(static_cast<unsigned char>(in_[pos_])))
        advance();
      if (in_.compare(pos_, 2, "//") == 0) {
        while (pos_ < in_.size() && in_[pos_] != '\n') advance();
        continue;
      }
      if (in_.compare(pos_, 2, "/*") == 0) {
        while (pos_ < in_.size() && in_.compare(pos_, 2, "*/") != 0)
          advance();
        if (pos_ < in_.size()) {
          advance();
          advance();
        }
        continue;
      }
      return;
    }
  }

  char advance() {
    char c = in_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  std::string in_;
  std::string file_;
  std::size_t pos_ = 0;
  std::size_t line_;
  std::size_t col_;
  Token tok_;
};

// ---------------------------------------------------------------------------
// Formula parser (Tamarin-flavored surface syntax)
// ---------------------------------------------------------------------------
//
//   formula  := implies ('<=>' implies)*
//   implies  := or ('==>' implies)?
//   or       := and ('|' and)*
//   and      := unary ('&' unary)*
//   unary    := 'not' unary | ('All'|'Ex') var+ '.' formula | primary
//   primary  := '(' formula ')' | 'F' | 'T' | atom
//   atom     := #i ('<'|'=') #j | Fact '@' #i | term '=' term
//
// Bare identifiers are message variables unless they are declared zero-arity
// function symbols; identifiers followed by '(' in term position must be
// declared functions. With `lenient_functions`, unknown function symbols are
// registered on first use (arity-checked on later uses).

class FormulaParser {
 public:
  FormulaParser(Tokenizer& tz, Signature& sig, bool lenient_functions = false)
      : tz_(tz), sig_(sig), lenient_(lenient_functions) {}

  FormulaPtr parse() { return parse_iff(); }

  Term parse_term() { return term(); }
  Fact parse_fact() { return fact(); }

 private:
  FormulaPtr parse_iff() {
    FormulaPtr a = parse_implies();
    while (tz_.accept_symbol("<=>")) a = Formula::iff(a, parse_implies());
    return a;
  }

  FormulaPtr parse_implies() {
    FormulaPtr a = parse_or();
    if (tz_.accept_symbol("==>")) return Formula::implies(a, parse_implies());
    return a;
  }

  FormulaPtr parse_or() {
    FormulaPtr a = parse_and();
    while (tz_.accept_symbol("|")) a = Formula::lor(a, parse_and());
    return a;
  }

  FormulaPtr parse_and() {
    FormulaPtr a = parse_unary();
    while (tz_.accept_symbol("&")) a = Formula::land(a, parse_unary());
    return a;
  }

  FormulaPtr parse_unary() {
    if (tz_.accept_ident("not")) return Formula::lnot(parse_unary());
    if (tz_.at_ident("All") || tz_.at_ident("Ex")) {
      bool universal = tz_.take().text == "All";
      std::vector<Variable> vars;
      for (;;) {
        const Token& t = tz_.peek();
        if (t.type == Token::Type::Ident && t.text != "not") {
          vars.push_back(Variable{tz_.take().text, Sort::Msg});
        } else if (t.type == Token::Type::PubVar) {
          vars.push_back(Variable{tz_.take().text, Sort::Pub});
        } else if (t.type == Token::Type::FreshVar) {
          vars.push_back(Variable{tz_.take().text, Sort::Fresh});
        } else if (t.type == Token::Type::TempVar) {
          vars.push_back(Variable{tz_.take().text, Sort::Temp});
        } else {
          break;
        }
      }
      if (vars.empty()) tz_.fail("expected quantified variables");
      tz_.expect_symbol(".");
      FormulaPtr body = parse_iff();
      return universal ? Formula::forall(std::move(vars), body)
                       : Formula::exists(std::move(vars), body);
    }
    return parse_primary();
  }

  FormulaPtr parse_primary() {
    if (tz_.accept_symbol("(")) {
      FormulaPtr f = parse_iff();
      tz_.expect_symbol(")");
      return f;
    }
    const Token& t = tz_.peek();
    if (t.type == Token::Type::TempVar) {
      Term i = temp_var();
      if (tz_.accept_symbol("<")) return Formula::time_less(i, temp_var());
      tz_.expect_symbol("=");
      return Formula::time_eq(i, temp_var());
    }
    // Identifiers followed by '(' and later '@' are actions; everything else
    // is a term equality. F and T stand for falsum and truth.
    if (t.type == Token::Type::Ident) {
      Token name = tz_.take();
      if (tz_.at_symbol("(")) {
        std::vector<Term> args = arg_list();
        if (tz_.accept_symbol("@"))
          return Formula::action(Fact{name.text, std::move(args)},
                                 temp_var());
        Term lhs = applied(name, std::move(args));
        tz_.expect_symbol("=");
        return Formula::term_eq(lhs, term());
      }
      if (name.text == "F") return Formula::falsum();
      if (name.text == "T") return Formula::truth();
      const FunctionSymbol* f = sig_.find(name.text);
      Term lhs = f && f->arity == 0 ? Term::app(name.text, {})
                                    : Term::var(name.text, Sort::Msg);
      tz_.expect_symbol("=");
      return Formula::term_eq(lhs, term());
    }
    Term lhs = term();
    tz_.expect_symbol("=");
    return Formula::term_eq(lhs, term());
  }

  Term temp_var() {
    const Token& t = tz_.peek();
    if (t.type != Token::Type::TempVar) tz_.fail("expected #timepoint");
    return Term::var(tz_.take().text, Sort::Temp);
  }

  std::vector<Term> arg_list() {
    tz_.expect_symbol("(");
    std::vector<Term> args;
    if (tz_.accept_symbol(")")) return args;
    args.push_back(term());
    while (tz_.accept_symbol(",")) args.push_back(term());
    tz_.expect_symbol(")");
    return args;
  }

  Term applied(const Token& name, std::vector<Term> args) {
    const FunctionSymbol* f = sig_.find(name.text);
    if (!f) {
      if (!lenient_)
        throw ParseError(tz_.file(), name.line, name.col,
                         "unknown function symbol '" + name.text + "'");
      sig_.add(FunctionSymbol{name.text, args.size()});
      f = sig_.find(name.text);
    }
    if (f->arity != args.size())
      throw ParseError(tz_.file(), name.line, name.col,
                       "function '" + name.text + "' expects " +
                           std::to_string(f->arity) + " arguments, got " +
                           std::to_string(args.size()));
    return Term::app(name.text, std::move(args));
  }

  Term term() {
    const Token& t = tz_.peek();
    switch (t.type) {
      case Token::Type::PubVar:
        return Term::var(tz_.take().text, Sort::Pub);
      case Token::Type::FreshVar:
        return Term::var(tz_.take().text, Sort::Fresh);
      case Token::Type::PubName:
        return Term::pub(tz_.take().text);
      case Token::Type::Ident: {
        Token name = tz_.take();
        if (tz_.at_symbol("(")) return applied(name, arg_list());
        const FunctionSymbol* f = sig_.find(name.text);
        if (f && f->arity == 0) return Term::app(name.text, {});
        return Term::var(name.text, Sort::Msg);
      }
      case Token::Type::Symbol:
        if (t.text == "<") {
          tz_.take();
          std::vector<Term> xs;
          xs.push_back(term());
          while (tz_.accept_symbol(",")) xs.push_back(term());
          tz_.expect_symbol(">");
          return tuple_term(std::move(xs));
        }
        break;
      default:
        break;
    }
    tz_.fail("expected a term");
  }

  Fact fact() {
    if (tz_.peek().type != Token::Type::Ident) tz_.fail("expected a fact");
    Token name = tz_.take();
    return Fact{name.text, arg_list()};
  }

  Tokenizer& tz_;
  Signature& sig_;
  bool lenient_;
};

// Parses a complete formula from a string, e.g. the contents of a quoted
// restriction or case-test body.
inline FormulaPtr parse_formula(const std::string& text, Signature& sig,
                                bool lenient_functions = false,
                                const std::string& file = "<formula>",
                                std::size_t line = 1, std::size_t col = 1) {
  Tokenizer tz(text, file, line, col);
  FormulaParser p(tz, sig, lenient_functions);
  FormulaPtr f = p.parse();
  if (tz.peek().type != Token::Type::End) tz.fail("unexpected trailing input");
  return f;
}

inline Term parse_term(const std::string& text, Signature& sig,
                       bool lenient_functions = false) {
  Tokenizer tz(text, "<term>");
  FormulaParser p(tz, sig, lenient_functions);
  Term t = p.parse_term();
  if (tz.peek().type != Token::Type::End) tz.fail("unexpected trailing input");
  return t;
}

}  // namespace acclab
