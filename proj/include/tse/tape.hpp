#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace tse {

/// Handle to a node on a Tape.
struct NodeId {
    int index = -1;
    bool valid() const { return index >= 0; }
    bool operator==(const NodeId&) const = default;
};

/// Reverse-mode record of batched matrix operations.
///
/// Values are matrices laid out features x batch (one column per sample
/// point). Nodes are appended in evaluation order, so the record is always
/// topologically sorted and a single backward sweep yields exact adjoints.
/// Derivative computations (for example forward tangents with respect to
/// network inputs) are recorded as ordinary nodes, which makes them
/// differentiable in turn.
class Tape {
public:
    enum class Op {
        constant,
        parameter,
        matmul,      // W * h
        affine,      // W * h + b, b broadcast over columns
        add,
        sub,
        mul,         // elementwise
        scale,       // c * a
        add_scalar,  // a + c
        tanh,
        tanh_slope,  // 1 - y^2, applied to a tanh output y
        square,
        mean,        // 1x1 mean of all entries
        sum,         // 1x1 sum of all entries
    };

    /// Pre-activations beyond this magnitude are counted as saturated.
    static constexpr double kSaturation = 30.0;

    NodeId constant(Eigen::MatrixXd value);
    /// Leaf standing for a trainable tensor; `slot` identifies it to callers.
    NodeId parameter(Eigen::MatrixXd value, int slot);

    NodeId matmul(NodeId w, NodeId h);
    NodeId affine(NodeId w, NodeId h, NodeId b);
    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);
    NodeId scale(NodeId a, double c);
    NodeId add_scalar(NodeId a, double c);
    NodeId tanh(NodeId a);
    NodeId tanh_slope(NodeId y);
    NodeId square(NodeId a);
    NodeId mean(NodeId a);
    NodeId sum(NodeId a);

    const Eigen::MatrixXd& value(NodeId n) const { return nodes_.at(n.index).value; }
    double scalar(NodeId n) const;
    Op op(NodeId n) const { return nodes_.at(n.index).op; }
    std::size_t size() const { return nodes_.size(); }
    NodeId last() const { return NodeId{static_cast<int>(nodes_.size()) - 1}; }

    /// Adjoints of every parameter leaf with respect to the 1x1 node `root`,
    /// indexed by slot. Slots never reached get empty matrices. Throws
    /// ContractError if root is not 1x1.
    std::vector<Eigen::MatrixXd> gradient(NodeId root, int slot_count) const;

    /// Re-evaluates every non-leaf node from its operands and reports whether
    /// each stored value is reproduced bit-exactly.
    bool replay_matches() const;

    /// Number of tanh pre-activation entries with magnitude above kSaturation.
    long saturated_entries() const { return saturated_; }

private:
    struct Node {
        explicit Node(Op o, int x = -1, int y = -1, int z = -1) : op(o), a(x), b(y), c(z) {}

        Op op;
        int a = -1;
        int b = -1;
        int c = -1;
        double k = 0.0;
        int slot = -1;
        bool needs_grad = false;
        Eigen::MatrixXd value;
    };

    NodeId push(Node node);
    Eigen::MatrixXd evaluate(const Node& node) const;
    const Node& at(NodeId n) const;
    int checked(NodeId n) const;

    std::vector<Node> nodes_;
    long saturated_ = 0;
};

}  // namespace tse
