#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "zkimg/field.hpp"

namespace zkimg {

// Polynomial expression over grid cells: column queries at fixed row offsets
// (rotations) combined with field-constant coefficients. Immutable, cheaply
// copyable; gates and lookup inputs are built from these.
class Expr {
  public:
    enum class Op : uint8_t { constant, cell, add, mul, neg, scale };

    struct Node {
        Op op;
        Fe k;           // constant / scale factor
        uint32_t col = 0;
        int32_t rot = 0;
        std::shared_ptr<const Node> a, b;
    };

    Expr() : Expr(constant(Fe::zero())) {}

    static Expr constant(const Fe& k) {
        Node n{Op::constant, k, 0, 0, nullptr, nullptr};
        return Expr(std::make_shared<const Node>(std::move(n)));
    }
    static Expr constant(int64_t k) { return constant(Fe::from_i64(k)); }

    static Expr cell(uint32_t col, int32_t rot = 0) {
        Node n{Op::cell, Fe::zero(), col, rot, nullptr, nullptr};
        return Expr(std::make_shared<const Node>(std::move(n)));
    }

    Expr operator+(const Expr& o) const { return binary(Op::add, *this, o); }
    Expr operator-(const Expr& o) const { return *this + (-o); }
    Expr operator*(const Expr& o) const { return binary(Op::mul, *this, o); }
    Expr operator-() const {
        Node n{Op::neg, Fe::zero(), 0, 0, n_, nullptr};
        return Expr(std::make_shared<const Node>(std::move(n)));
    }
    Expr scaled(const Fe& k) const {
        Node n{Op::scale, k, 0, 0, n_, nullptr};
        return Expr(std::make_shared<const Node>(std::move(n)));
    }

    uint32_t degree() const { return degree(n_.get()); }

    int32_t max_rotation() const { return max_rot(n_.get()); }
    int32_t min_rotation() const { return min_rot(n_.get()); }

    // Columns queried anywhere in the tree.
    void collect_cols(std::vector<std::pair<uint32_t, int32_t>>& out) const {
        collect(n_.get(), out);
    }

    const std::shared_ptr<const Node>& root() const { return n_; }

    // Postfix tape for fast repeated evaluation.
    struct Instr {
        Op op;
        Fe k;
        uint32_t col;
        int32_t rot;
    };

    std::vector<Instr> compile() const {
        std::vector<Instr> tape;
        emit(n_.get(), tape);
        return tape;
    }

    // Evaluates the compiled tape at a row; `at` maps (col, row) -> Fe.
    template <typename CellAt>
    static Fe eval(const std::vector<Instr>& tape, uint64_t row, CellAt&& at,
                   std::vector<Fe>& stack) {
        stack.clear();
        for (const Instr& in : tape) {
            switch (in.op) {
                case Op::constant:
                    stack.push_back(in.k);
                    break;
                case Op::cell:
                    stack.push_back(at(in.col, static_cast<uint64_t>(
                                                   static_cast<int64_t>(row) + in.rot)));
                    break;
                case Op::add: {
                    Fe b = stack.back();
                    stack.pop_back();
                    stack.back() += b;
                    break;
                }
                case Op::mul: {
                    Fe b = stack.back();
                    stack.pop_back();
                    stack.back() *= b;
                    break;
                }
                case Op::neg:
                    stack.back() = -stack.back();
                    break;
                case Op::scale:
                    stack.back() *= in.k;
                    break;
            }
        }
        return stack.back();
    }

    explicit Expr(std::shared_ptr<const Node> n) : n_(std::move(n)) {}

  private:
    std::shared_ptr<const Node> n_;

    static Expr binary(Op op, const Expr& a, const Expr& b) {
        Node n{op, Fe::zero(), 0, 0, a.n_, b.n_};
        return Expr(std::make_shared<const Node>(std::move(n)));
    }

    static uint32_t degree(const Node* n) {
        switch (n->op) {
            case Op::constant: return 0;
            case Op::cell: return 1;
            case Op::add: return std::max(degree(n->a.get()), degree(n->b.get()));
            case Op::mul: return degree(n->a.get()) + degree(n->b.get());
            case Op::neg:
            case Op::scale: return degree(n->a.get());
        }
        return 0;
    }

    static int32_t max_rot(const Node* n) {
        switch (n->op) {
            case Op::constant: return 0;
            case Op::cell: return n->rot;
            case Op::add:
            case Op::mul: return std::max(max_rot(n->a.get()), max_rot(n->b.get()));
            case Op::neg:
            case Op::scale: return max_rot(n->a.get());
        }
        return 0;
    }

    static int32_t min_rot(const Node* n) {
        switch (n->op) {
            case Op::constant: return 0;
            case Op::cell: return n->rot;
            case Op::add:
            case Op::mul: return std::min(min_rot(n->a.get()), min_rot(n->b.get()));
            case Op::neg:
            case Op::scale: return min_rot(n->a.get());
        }
        return 0;
    }

    static void collect(const Node* n, std::vector<std::pair<uint32_t, int32_t>>& out) {
        switch (n->op) {
            case Op::constant: return;
            case Op::cell:
                out.emplace_back(n->col, n->rot);
                return;
            case Op::add:
            case Op::mul:
                collect(n->a.get(), out);
                collect(n->b.get(), out);
                return;
            case Op::neg:
            case Op::scale:
                collect(n->a.get(), out);
                return;
        }
    }

    static void emit(const Node* n, std::vector<Instr>& tape) {
        switch (n->op) {
            case Op::constant:
                tape.push_back({Op::constant, n->k, 0, 0});
                return;
            case Op::cell:
                tape.push_back({Op::cell, Fe::zero(), n->col, n->rot});
                return;
            case Op::add:
            case Op::mul:
                emit(n->a.get(), tape);
                emit(n->b.get(), tape);
                tape.push_back({n->op, Fe::zero(), 0, 0});
                return;
            case Op::neg:
            case Op::scale:
                emit(n->a.get(), tape);
                tape.push_back({n->op, n->k, 0, 0});
                return;
        }
    }
};

inline Expr operator*(const Fe& k, const Expr& e) { return e.scaled(k); }
inline Expr operator*(int64_t k, const Expr& e) { return e.scaled(Fe::from_i64(k)); }
inline Expr operator+(const Expr& e, int64_t k) { return e + Expr::constant(k); }
inline Expr operator-(const Expr& e, int64_t k) { return e + Expr::constant(-k); }

}  // namespace zkimg
