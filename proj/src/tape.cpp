#include "tse/tape.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "tse/errors.hpp"

namespace tse {

namespace {

void require_same_shape(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ContractError(std::string("tape: shape mismatch in ") + what + " (" +
                            std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
                            std::to_string(b.rows()) + "x" + std::to_string(b.cols()) + ")");
    }
}

void accumulate(Eigen::MatrixXd& into, bool& has, const Eigen::MatrixXd& delta) {
    if (has) {
        into += delta;
    } else {
        into = delta;
        has = true;
    }
}

}  // namespace

int Tape::checked(NodeId n) const {
    at(n);
    return n.index;
}

const Tape::Node& Tape::at(NodeId n) const {
    if (n.index < 0 || n.index >= static_cast<int>(nodes_.size())) {
        throw ContractError("tape: invalid node id " + std::to_string(n.index));
    }
    return nodes_[n.index];
}

double Tape::scalar(NodeId n) const {
    const auto& v = at(n).value;
    if (v.rows() != 1 || v.cols() != 1) throw ContractError("tape: node is not a scalar");
    return v(0, 0);
}

NodeId Tape::push(Node node) {
    for (int operand : {node.a, node.b, node.c}) {
        if (operand >= 0) node.needs_grad = node.needs_grad || nodes_[operand].needs_grad;
    }
    if (node.op == Op::tanh) {
        saturated_ += (nodes_[node.a].value.array().abs() > kSaturation).count();
    }
    node.value = evaluate(node);
    nodes_.push_back(std::move(node));
    return last();
}

NodeId Tape::constant(Eigen::MatrixXd value) {
    Node n{Op::constant};
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return last();
}

NodeId Tape::parameter(Eigen::MatrixXd value, int slot) {
    Node n{Op::parameter};
    n.slot = slot;
    n.needs_grad = true;
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return last();
}

NodeId Tape::matmul(NodeId w, NodeId h) {
    if (at(w).value.cols() != at(h).value.rows()) throw ContractError("tape: matmul inner dims");
    return push(Node{Op::matmul, w.index, h.index});
}

NodeId Tape::affine(NodeId w, NodeId h, NodeId b) {
    const auto& W = at(w).value;
    const auto& B = at(b).value;
    if (W.cols() != at(h).value.rows()) throw ContractError("tape: affine inner dims");
    if (B.rows() != W.rows() || B.cols() != 1) throw ContractError("tape: affine bias shape");
    return push(Node{Op::affine, w.index, h.index, b.index});
}

NodeId Tape::add(NodeId a, NodeId b) {
    require_same_shape(at(a).value, at(b).value, "add");
    return push(Node{Op::add, a.index, b.index});
}

NodeId Tape::sub(NodeId a, NodeId b) {
    require_same_shape(at(a).value, at(b).value, "sub");
    return push(Node{Op::sub, a.index, b.index});
}

NodeId Tape::mul(NodeId a, NodeId b) {
    require_same_shape(at(a).value, at(b).value, "mul");
    return push(Node{Op::mul, a.index, b.index});
}

NodeId Tape::scale(NodeId a, double c) {
    Node n{Op::scale, checked(a)};
    n.k = c;
    return push(std::move(n));
}

NodeId Tape::add_scalar(NodeId a, double c) {
    Node n{Op::add_scalar, checked(a)};
    n.k = c;
    return push(std::move(n));
}

NodeId Tape::tanh(NodeId a) { return push(Node{Op::tanh, checked(a)}); }
NodeId Tape::tanh_slope(NodeId y) { return push(Node{Op::tanh_slope, checked(y)}); }
NodeId Tape::square(NodeId a) { return push(Node{Op::square, checked(a)}); }
NodeId Tape::mean(NodeId a) { return push(Node{Op::mean, checked(a)}); }
NodeId Tape::sum(NodeId a) { return push(Node{Op::sum, checked(a)}); }

Eigen::MatrixXd Tape::evaluate(const Node& n) const {
    const auto value_of = [this](int i) -> const Eigen::MatrixXd& { return nodes_[i].value; };
    switch (n.op) {
        case Op::constant:
        case Op::parameter:
            return n.value;
        case Op::matmul:
            return value_of(n.a) * value_of(n.b);
        case Op::affine: {
            Eigen::MatrixXd out = value_of(n.a) * value_of(n.b);
            out.colwise() += value_of(n.c).col(0);
            return out;
        }
        case Op::add:
            return value_of(n.a) + value_of(n.b);
        case Op::sub:
            return value_of(n.a) - value_of(n.b);
        case Op::mul:
            return value_of(n.a).cwiseProduct(value_of(n.b));
        case Op::scale:
            return n.k * value_of(n.a);
        case Op::add_scalar:
            return (value_of(n.a).array() + n.k).matrix();
        case Op::tanh:
            return value_of(n.a).array().tanh().matrix();
        case Op::tanh_slope:
            return (1.0 - value_of(n.a).array().square()).matrix();
        case Op::square:
            return value_of(n.a).array().square().matrix();
        case Op::mean: {
            const auto& v = value_of(n.a);
            Eigen::MatrixXd out(1, 1);
            out(0, 0) = v.size() == 0 ? 0.0 : v.sum() / static_cast<double>(v.size());
            return out;
        }
        case Op::sum: {
            Eigen::MatrixXd out(1, 1);
            out(0, 0) = value_of(n.a).sum();
            return out;
        }
    }
    throw ContractError("tape: unknown op");
}

bool Tape::replay_matches() const {
    for (const auto& n : nodes_) {
        if (n.op == Op::constant || n.op == Op::parameter) continue;
        const Eigen::MatrixXd again = evaluate(n);
        if (again.rows() != n.value.rows() || again.cols() != n.value.cols()) return false;
        for (Eigen::Index k = 0; k < again.size(); ++k) {
            // Bitwise comparison; NaN payloads compare equal to themselves here.
            if (std::memcmp(&again.data()[k], &n.value.data()[k], sizeof(double)) != 0) {
                return false;
            }
        }
    }
    return true;
}

std::vector<Eigen::MatrixXd> Tape::gradient(NodeId root, int slot_count) const {
    const auto& r = at(root);
    if (r.value.rows() != 1 || r.value.cols() != 1) {
        throw ContractError("tape: gradient root must be a 1x1 scalar node");
    }
    std::vector<Eigen::MatrixXd> grads(slot_count);
    if (!r.needs_grad) return grads;

    const std::size_t count = static_cast<std::size_t>(root.index) + 1;
    std::vector<Eigen::MatrixXd> adj(count);
    std::vector<char> has(count, 0);
    adj[root.index] = Eigen::MatrixXd::Ones(1, 1);
    has[root.index] = 1;

    const auto push_adj = [&](int i, const Eigen::MatrixXd& delta) {
        if (i < 0 || !nodes_[i].needs_grad) return;
        bool flag = has[i] != 0;
        accumulate(adj[i], flag, delta);
        has[i] = 1;
    };

    for (int i = root.index; i >= 0; --i) {
        if (!has[i]) continue;
        const Node& n = nodes_[i];
        const Eigen::MatrixXd& g = adj[i];
        switch (n.op) {
            case Op::constant:
                break;
            case Op::parameter:
                if (n.slot >= 0 && n.slot < slot_count) {
                    if (grads[n.slot].size() == 0) {
                        grads[n.slot] = g;
                    } else {
                        grads[n.slot] += g;
                    }
                }
                break;
            case Op::matmul:
            case Op::affine: {
                const auto& W = nodes_[n.a].value;
                const auto& H = nodes_[n.b].value;
                if (nodes_[n.a].needs_grad) push_adj(n.a, g * H.transpose());
                if (nodes_[n.b].needs_grad) push_adj(n.b, W.transpose() * g);
                if (n.op == Op::affine && nodes_[n.c].needs_grad) {
                    push_adj(n.c, g.rowwise().sum());
                }
                break;
            }
            case Op::add:
                push_adj(n.a, g);
                push_adj(n.b, g);
                break;
            case Op::sub:
                push_adj(n.a, g);
                if (nodes_[n.b].needs_grad) push_adj(n.b, -g);
                break;
            case Op::mul:
                if (nodes_[n.a].needs_grad) push_adj(n.a, g.cwiseProduct(nodes_[n.b].value));
                if (nodes_[n.b].needs_grad) push_adj(n.b, g.cwiseProduct(nodes_[n.a].value));
                break;
            case Op::scale:
                push_adj(n.a, n.k * g);
                break;
            case Op::add_scalar:
                push_adj(n.a, g);
                break;
            case Op::tanh:
                push_adj(n.a, (g.array() * (1.0 - n.value.array().square())).matrix());
                break;
            case Op::tanh_slope:
                push_adj(n.a, (g.array() * (-2.0) * nodes_[n.a].value.array()).matrix());
                break;
            case Op::square:
                push_adj(n.a, (g.array() * 2.0 * nodes_[n.a].value.array()).matrix());
                break;
            case Op::mean: {
                const auto& v = nodes_[n.a].value;
                if (v.size() > 0) {
                    push_adj(n.a, Eigen::MatrixXd::Constant(v.rows(), v.cols(),
                                                            g(0, 0) / static_cast<double>(v.size())));
                }
                break;
            }
            case Op::sum: {
                const auto& v = nodes_[n.a].value;
                push_adj(n.a, Eigen::MatrixXd::Constant(v.rows(), v.cols(), g(0, 0)));
                break;
            }
        }
        // Adjoints of consumed nodes are no longer needed.
        adj[i].resize(0, 0);
    }
    return grads;
}

}  // namespace tse
