#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mongolog/term.hpp"

namespace mongolog {

class parse_error : public std::runtime_error {
 public:
  parse_error(std::size_t line, std::size_t column, const std::string& what)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

struct Goal {
  enum class Kind {
    Call,
    True,
    False,
    Conj,
    Disj,
    IfThen,
    IfThenElse,
    Neg,
    LimitG,
    Once,
    Ignore,
    Unify,
    EqG,
    NeqG,
    VarG,
    NonvarG,
    GroundG,
    Transitive,
  };

  Kind kind = Kind::True;
  Term t1 = Term::atom("");   // Call target; first term of Unify/EqG/NeqG; sole term of type checks
  Term t2 = Term::atom("");   // second term of Unify/EqG/NeqG and Transitive
  std::string pred;           // Transitive predicate name
  std::int64_t k = 0;         // LimitG count
  std::vector<Goal> children; // Conj/Disj members; [cond,then(,else)]; single wrapped goal

  static Goal call(Term t);
  static Goal truth();
  static Goal falsity();
  static Goal conj(std::vector<Goal> gs);
  static Goal disj(std::vector<Goal> gs);
  static Goal if_then(Goal cond, Goal then_g);
  static Goal if_then_else(Goal cond, Goal then_g, Goal else_g);
  static Goal neg(Goal g);
  static Goal limit(Goal g, std::int64_t k);
  static Goal once(Goal g);
  static Goal ignore(Goal g);
  static Goal unify(Term a, Term b);
  static Goal eq(Term a, Term b);
  static Goal neq(Term a, Term b);
  static Goal var_check(Term t);
  static Goal nonvar_check(Term t);
  static Goal ground_check(Term t);
  static Goal transitive(std::string pred, Term a, Term b);

  friend bool operator==(const Goal& a, const Goal& b);
  friend bool operator!=(const Goal& a, const Goal& b) { return !(a == b); }
};

struct Clause {
  Term head = Term::atom("");
  Goal body;
};

struct Program {
  std::vector<Clause> clauses;
  std::set<std::pair<std::string, std::size_t>> edb;

  bool is_edb(const std::string& name, std::size_t arity) const {
    return edb.count({name, arity}) > 0;
  }
  bool has_clauses(const std::string& name, std::size_t arity) const;
  std::vector<const Clause*> clauses_for(const std::string& name, std::size_t arity) const;
};

Program parse_program(const std::string& source);
Goal parse_query(const std::string& source);

// Reads a single term (no clause terminator), mainly for tests and the CLI.
Term parse_term(const std::string& source);

std::string print_term(const Term& t);
std::string print_goal(const Goal& g);

// The operator-term rendering of a goal, as the instantiation reporter needs it.
Term goal_to_term(const Goal& g);

// All distinct variable (name, first-occurrence key) pairs in a goal, pre-order.
std::vector<std::pair<std::string, std::string>> goal_vars(const Goal& g);

}  // namespace mongolog
