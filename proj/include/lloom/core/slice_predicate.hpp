#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "lloom/core/types.hpp"
#include "lloom/error.hpp"

namespace lloom::slice {

// Grammar:
//   expr       := and_expr ( "or" and_expr )*
//   and_expr   := unary ( "and" unary )*
//   unary      := "not" unary | "(" expr ")" | comparison
//   comparison := operand op literal
//   operand    := identifier | `quoted identifier` | concept("name")
//   op         := < | <= | > | >= | == | !=
//   literal    := number | "string" | 'string' | true | false

enum class CmpOp { Lt, Le, Gt, Ge, Eq, Ne };

struct Comparison {
    bool is_concept = false;
    std::string name;
    CmpOp op = CmpOp::Eq;
    Scalar literal;
    std::size_t position = 0;

    bool operator==(const Comparison&) const = default;
};

struct Expr {
    enum class Kind { Compare, And, Or, Not };
    Kind kind = Kind::Compare;
    Comparison cmp;
    std::vector<Expr> children;

    bool operator==(const Expr&) const = default;
};

class PredicateError : public ValidationError {
public:
    PredicateError(const std::string& what, std::size_t position)
        : ValidationError(what + " at position " + std::to_string(position)), position_(position) {}
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

Expr parse(std::string_view text);

/// Throws ValidationError for unknown columns/concepts (with near-miss
/// suggestions) and for type-incompatible comparisons.
void check(const Expr& e, const Session& s);

/// Ids of matching documents, in session document order.
std::vector<std::string> evaluate(const Expr& e, const Session& s);

/// parse + check + evaluate. The reserved name "All" selects every document.
std::vector<std::string> slice_documents(const Session& s, const Slice& slice);

} // namespace lloom::slice
