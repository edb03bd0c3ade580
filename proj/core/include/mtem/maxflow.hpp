#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <vector>

namespace mtem {

/// Boykov-Kolmogorov augmenting-path max-flow on a graph with real-valued
/// capacities. Built for grid-structured energies: nodes and edges are added
/// up front, solve() runs once, then segment() reports which side of the
/// minimum cut each node ended on.
class MaxFlowGraph {
public:
    using NodeId = std::int32_t;

    enum class Segment : std::uint8_t { Source, Sink };

    MaxFlowGraph() = default;
    MaxFlowGraph(std::size_t node_hint, std::size_t edge_hint);

    NodeId add_node();
    std::size_t node_count() const noexcept { return nodes_.size(); }

    /// Adds capacity from the source to `node` and from `node` to the sink.
    /// Accumulates over repeated calls.
    void add_terminal_weights(NodeId node, double source_cap, double sink_cap);

    /// Adds the arc pair node_a -> node_b (cap_ab) and node_b -> node_a (cap_ba).
    void add_edge(NodeId node_a, NodeId node_b, double cap_ab, double cap_ba);

    /// Runs the max-flow computation and returns the flow value (which equals
    /// the minimum cut capacity).
    double solve();

    /// Side of the minimum cut after solve(). Nodes reachable from neither
    /// terminal in the residual graph are reported as Source.
    Segment segment(NodeId node) const noexcept;

private:
    using ArcId = std::int32_t;
    static constexpr ArcId kNone = -1;
    static constexpr ArcId kTerminal = -2;
    static constexpr ArcId kOrphan = -3;

    struct Node {
        ArcId first = kNone;   // head of outgoing arc list
        ArcId parent = kNone;  // arc to parent in search tree, or a marker
        NodeId next = -1;      // active queue link (self = last element)
        std::int64_t timestamp = 0;
        std::int32_t dist = 0;
        bool is_sink = false;
        double tr_cap = 0.0;   // >0: residual from source, <0: residual to sink
    };

    struct Arc {
        NodeId head = 0;
        ArcId next = kNone;
        double r_cap = 0.0;
    };

    static ArcId sister(ArcId a) noexcept { return a ^ 1; }

    void set_active(NodeId i);
    NodeId next_active();
    void set_orphan_front(NodeId i);
    void set_orphan_rear(NodeId i);
    void augment(ArcId middle);
    void process_source_orphan(NodeId i);
    void process_sink_orphan(NodeId i);

    std::vector<Node> nodes_;
    std::vector<Arc> arcs_;
    double flow_ = 0.0;

    NodeId queue_first_ = -1;
    NodeId queue_last_ = -1;
    std::deque<NodeId> orphans_;
    std::int64_t time_ = 0;
};

}  // namespace mtem
