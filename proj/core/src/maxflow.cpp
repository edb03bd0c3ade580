#include "mtem/maxflow.hpp"

#include <algorithm>
#include <limits>

#include "mtem/error.hpp"

namespace mtem {

MaxFlowGraph::MaxFlowGraph(std::size_t node_hint, std::size_t edge_hint) {
    nodes_.reserve(node_hint);
    arcs_.reserve(2 * edge_hint);
}

MaxFlowGraph::NodeId MaxFlowGraph::add_node() {
    if (nodes_.size() >= static_cast<std::size_t>(std::numeric_limits<NodeId>::max())) {
        throw_validation("max-flow graph node limit exceeded");
    }
    nodes_.emplace_back();
    return static_cast<NodeId>(nodes_.size() - 1);
}

void MaxFlowGraph::add_terminal_weights(NodeId node, double source_cap, double sink_cap) {
    auto& n = nodes_[static_cast<std::size_t>(node)];
    // Only the difference matters for the cut; the common part is pushed
    // straight through.
    const double common = std::min(source_cap, sink_cap);
    flow_ += common;
    n.tr_cap += source_cap - sink_cap;
}

void MaxFlowGraph::add_edge(NodeId node_a, NodeId node_b, double cap_ab, double cap_ba) {
    if (arcs_.size() + 2 >= static_cast<std::size_t>(std::numeric_limits<ArcId>::max())) {
        throw_validation("max-flow graph arc limit exceeded");
    }
    const auto a = static_cast<ArcId>(arcs_.size());
    const auto b = a + 1;
    auto& na = nodes_[static_cast<std::size_t>(node_a)];
    auto& nb = nodes_[static_cast<std::size_t>(node_b)];
    arcs_.push_back(Arc{node_b, na.first, cap_ab});
    na.first = a;
    arcs_.push_back(Arc{node_a, nb.first, cap_ba});
    nb.first = b;
}

void MaxFlowGraph::set_active(NodeId i) {
    auto& n = nodes_[static_cast<std::size_t>(i)];
    if (n.next >= 0) return;
    if (queue_last_ >= 0) {
        nodes_[static_cast<std::size_t>(queue_last_)].next = i;
    } else {
        queue_first_ = i;
    }
    queue_last_ = i;
    n.next = i;
}

MaxFlowGraph::NodeId MaxFlowGraph::next_active() {
    while (queue_first_ >= 0) {
        const NodeId i = queue_first_;
        auto& n = nodes_[static_cast<std::size_t>(i)];
        if (n.next == i) {
            queue_first_ = queue_last_ = -1;
        } else {
            queue_first_ = n.next;
        }
        n.next = -1;
        if (n.parent != kNone) return i;
    }
    return -1;
}

void MaxFlowGraph::set_orphan_front(NodeId i) {
    nodes_[static_cast<std::size_t>(i)].parent = kOrphan;
    orphans_.push_front(i);
}

void MaxFlowGraph::set_orphan_rear(NodeId i) {
    nodes_[static_cast<std::size_t>(i)].parent = kOrphan;
    orphans_.push_back(i);
}

void MaxFlowGraph::augment(ArcId middle) {
    auto& arcs = arcs_;
    auto& nodes = nodes_;

    // Bottleneck along source tree, middle arc, sink tree.
    double bottleneck = arcs[static_cast<std::size_t>(middle)].r_cap;
    NodeId i = arcs[static_cast<std::size_t>(sister(middle))].head;
    for (ArcId a = nodes[static_cast<std::size_t>(i)].parent; a != kTerminal;
         a = nodes[static_cast<std::size_t>(i)].parent) {
        bottleneck = std::min(bottleneck, arcs[static_cast<std::size_t>(sister(a))].r_cap);
        i = arcs[static_cast<std::size_t>(a)].head;
    }
    bottleneck = std::min(bottleneck, nodes[static_cast<std::size_t>(i)].tr_cap);
    i = arcs[static_cast<std::size_t>(middle)].head;
    for (ArcId a = nodes[static_cast<std::size_t>(i)].parent; a != kTerminal;
         a = nodes[static_cast<std::size_t>(i)].parent) {
        bottleneck = std::min(bottleneck, arcs[static_cast<std::size_t>(a)].r_cap);
        i = arcs[static_cast<std::size_t>(a)].head;
    }
    bottleneck = std::min(bottleneck, -nodes[static_cast<std::size_t>(i)].tr_cap);

    arcs[static_cast<std::size_t>(sister(middle))].r_cap += bottleneck;
    arcs[static_cast<std::size_t>(middle)].r_cap -= bottleneck;

    i = arcs[static_cast<std::size_t>(sister(middle))].head;
    for (ArcId a = nodes[static_cast<std::size_t>(i)].parent; a != kTerminal;
         a = nodes[static_cast<std::size_t>(i)].parent) {
        arcs[static_cast<std::size_t>(a)].r_cap += bottleneck;
        auto& back = arcs[static_cast<std::size_t>(sister(a))];
        back.r_cap -= bottleneck;
        if (back.r_cap <= 0.0) {
            back.r_cap = 0.0;
            set_orphan_front(i);
        }
        i = arcs[static_cast<std::size_t>(a)].head;
    }
    nodes[static_cast<std::size_t>(i)].tr_cap -= bottleneck;
    if (nodes[static_cast<std::size_t>(i)].tr_cap <= 0.0) {
        nodes[static_cast<std::size_t>(i)].tr_cap = 0.0;
        set_orphan_front(i);
    }

    i = arcs[static_cast<std::size_t>(middle)].head;
    for (ArcId a = nodes[static_cast<std::size_t>(i)].parent; a != kTerminal;
         a = nodes[static_cast<std::size_t>(i)].parent) {
        arcs[static_cast<std::size_t>(sister(a))].r_cap += bottleneck;
        auto& fwd = arcs[static_cast<std::size_t>(a)];
        fwd.r_cap -= bottleneck;
        if (fwd.r_cap <= 0.0) {
            fwd.r_cap = 0.0;
            set_orphan_front(i);
        }
        i = arcs[static_cast<std::size_t>(a)].head;
    }
    nodes[static_cast<std::size_t>(i)].tr_cap += bottleneck;
    if (nodes[static_cast<std::size_t>(i)].tr_cap >= 0.0) {
        nodes[static_cast<std::size_t>(i)].tr_cap = 0.0;
        set_orphan_front(i);
    }

    flow_ += bottleneck;
}

void MaxFlowGraph::process_source_orphan(NodeId i) {
    constexpr std::int32_t kInfiniteDist = std::numeric_limits<std::int32_t>::max();
    auto& nodes = nodes_;
    auto& arcs = arcs_;

    ArcId best_arc = kNone;
    std::int32_t best_dist = kInfiniteDist;

    for (ArcId a0 = nodes[static_cast<std::size_t>(i)].first; a0 != kNone;
         a0 = arcs[static_cast<std::size_t>(a0)].next) {
        if (arcs[static_cast<std::size_t>(sister(a0))].r_cap <= 0.0) continue;
        NodeId j = arcs[static_cast<std::size_t>(a0)].head;
        if (nodes[static_cast<std::size_t>(j)].is_sink ||
            nodes[static_cast<std::size_t>(j)].parent == kNone) {
            continue;
        }
        // Walk to the root to check that j still connects to the source.
        std::int32_t d = 0;
        for (;;) {
            auto& nj = nodes[static_cast<std::size_t>(j)];
            if (nj.timestamp == time_) {
                d += nj.dist;
                break;
            }
            const ArcId a = nj.parent;
            ++d;
            if (a == kTerminal) {
                nj.timestamp = time_;
                nj.dist = 1;
                break;
            }
            if (a == kOrphan) {
                d = kInfiniteDist;
                break;
            }
            j = arcs[static_cast<std::size_t>(a)].head;
        }
        if (d < kInfiniteDist) {
            if (d < best_dist) {
                best_arc = a0;
                best_dist = d;
            }
            for (j = arcs[static_cast<std::size_t>(a0)].head;
                 nodes[static_cast<std::size_t>(j)].timestamp != time_;
                 j = arcs[static_cast<std::size_t>(nodes[static_cast<std::size_t>(j)].parent)].head) {
                nodes[static_cast<std::size_t>(j)].timestamp = time_;
                nodes[static_cast<std::size_t>(j)].dist = d--;
            }
        }
    }

    auto& ni = nodes[static_cast<std::size_t>(i)];
    ni.parent = best_arc;
    if (best_arc != kNone) {
        ni.timestamp = time_;
        ni.dist = best_dist + 1;
        return;
    }
    ni.parent = kNone;
    for (ArcId a0 = ni.first; a0 != kNone; a0 = arcs[static_cast<std::size_t>(a0)].next) {
        const NodeId j = arcs[static_cast<std::size_t>(a0)].head;
        auto& nj = nodes[static_cast<std::size_t>(j)];
        const ArcId a = nj.parent;
        if (nj.is_sink || a == kNone) continue;
        if (arcs[static_cast<std::size_t>(sister(a0))].r_cap > 0.0) set_active(j);
        if (a != kTerminal && a != kOrphan && arcs[static_cast<std::size_t>(a)].head == i) {
            set_orphan_rear(j);
        }
    }
}

void MaxFlowGraph::process_sink_orphan(NodeId i) {
    constexpr std::int32_t kInfiniteDist = std::numeric_limits<std::int32_t>::max();
    auto& nodes = nodes_;
    auto& arcs = arcs_;

    ArcId best_arc = kNone;
    std::int32_t best_dist = kInfiniteDist;

    for (ArcId a0 = nodes[static_cast<std::size_t>(i)].first; a0 != kNone;
         a0 = arcs[static_cast<std::size_t>(a0)].next) {
        if (arcs[static_cast<std::size_t>(a0)].r_cap <= 0.0) continue;
        NodeId j = arcs[static_cast<std::size_t>(a0)].head;
        if (!nodes[static_cast<std::size_t>(j)].is_sink ||
            nodes[static_cast<std::size_t>(j)].parent == kNone) {
            continue;
        }
        std::int32_t d = 0;
        for (;;) {
            auto& nj = nodes[static_cast<std::size_t>(j)];
            if (nj.timestamp == time_) {
                d += nj.dist;
                break;
            }
            const ArcId a = nj.parent;
            ++d;
            if (a == kTerminal) {
                nj.timestamp = time_;
                nj.dist = 1;
                break;
            }
            if (a == kOrphan) {
                d = kInfiniteDist;
                break;
            }
            j = arcs[static_cast<std::size_t>(a)].head;
        }
        if (d < kInfiniteDist) {
            if (d < best_dist) {
                best_arc = a0;
                best_dist = d;
            }
            for (j = arcs[static_cast<std::size_t>(a0)].head;
                 nodes[static_cast<std::size_t>(j)].timestamp != time_;
                 j = arcs[static_cast<std::size_t>(nodes[static_cast<std::size_t>(j)].parent)].head) {
                nodes[static_cast<std::size_t>(j)].timestamp = time_;
                nodes[static_cast<std::size_t>(j)].dist = d--;
            }
        }
    }

    auto& ni = nodes[static_cast<std::size_t>(i)];
    ni.parent = best_arc;
    if (best_arc != kNone) {
        ni.timestamp = time_;
        ni.dist = best_dist + 1;
        return;
    }
    ni.parent = kNone;
    for (ArcId a0 = ni.first; a0 != kNone; a0 = arcs[static_cast<std::size_t>(a0)].next) {
        const NodeId j = arcs[static_cast<std::size_t>(a0)].head;
        auto& nj = nodes[static_cast<std::size_t>(j)];
        const ArcId a = nj.parent;
        if (!nj.is_sink || a == kNone) continue;
        if (arcs[static_cast<std::size_t>(a0)].r_cap > 0.0) set_active(j);
        if (a != kTerminal && a != kOrphan && arcs[static_cast<std::size_t>(a)].head == i) {
            set_orphan_rear(j);
        }
    }
}

double MaxFlowGraph::solve() {
    queue_first_ = queue_last_ = -1;
    orphans_.clear();
    time_ = 0;

    for (std::size_t k = 0; k < nodes_.size(); ++k) {
        auto& n = nodes_[k];
        n.next = -1;
        n.timestamp = time_;
        if (n.tr_cap > 0.0) {
            n.is_sink = false;
            n.parent = kTerminal;
            n.dist = 1;
            set_active(static_cast<NodeId>(k));
        } else if (n.tr_cap < 0.0) {
            n.is_sink = true;
            n.parent = kTerminal;
            n.dist = 1;
            set_active(static_cast<NodeId>(k));
        } else {
            n.parent = kNone;
        }
    }

    NodeId current = -1;
    for (;;) {
        NodeId i = current;
        if (i >= 0 && nodes_[static_cast<std::size_t>(i)].parent == kNone) i = -1;
        if (i < 0) {
            i = next_active();
            if (i < 0) break;
        }

        // Grow the tree rooted at i's terminal until it touches the other tree.
        ArcId middle = kNone;
        const Node& ni = nodes_[static_cast<std::size_t>(i)];
        if (!ni.is_sink) {
            for (ArcId a = ni.first; a != kNone; a = arcs_[static_cast<std::size_t>(a)].next) {
                if (arcs_[static_cast<std::size_t>(a)].r_cap <= 0.0) continue;
                const NodeId j = arcs_[static_cast<std::size_t>(a)].head;
                auto& nj = nodes_[static_cast<std::size_t>(j)];
                if (nj.parent == kNone) {
                    nj.is_sink = false;
                    nj.parent = sister(a);
                    nj.timestamp = ni.timestamp;
                    nj.dist = ni.dist + 1;
                    set_active(j);
                } else if (nj.is_sink) {
                    middle = a;
                    break;
                } else if (nj.timestamp <= ni.timestamp && nj.dist > ni.dist) {
                    nj.parent = sister(a);
                    nj.timestamp = ni.timestamp;
                    nj.dist = ni.dist + 1;
                }
            }
        } else {
            for (ArcId a = ni.first; a != kNone; a = arcs_[static_cast<std::size_t>(a)].next) {
                if (arcs_[static_cast<std::size_t>(sister(a))].r_cap <= 0.0) continue;
                const NodeId j = arcs_[static_cast<std::size_t>(a)].head;
                auto& nj = nodes_[static_cast<std::size_t>(j)];
                if (nj.parent == kNone) {
                    nj.is_sink = true;
                    nj.parent = sister(a);
                    nj.timestamp = ni.timestamp;
                    nj.dist = ni.dist + 1;
                    set_active(j);
                } else if (!nj.is_sink) {
                    middle = sister(a);
                    break;
                } else if (nj.timestamp <= ni.timestamp && nj.dist > ni.dist) {
                    nj.parent = sister(a);
                    nj.timestamp = ni.timestamp;
                    nj.dist = ni.dist + 1;
                }
            }
        }

        ++time_;
        if (middle == kNone) {
            current = -1;
            continue;
        }

        current = i;
        augment(middle);
        while (!orphans_.empty()) {
            const NodeId o = orphans_.front();
            orphans_.pop_front();
            if (nodes_[static_cast<std::size_t>(o)].is_sink) {
                process_sink_orphan(o);
            } else {
                process_source_orphan(o);
            }
        }
    }
    return flow_;
}

MaxFlowGraph::Segment MaxFlowGraph::segment(NodeId node) const noexcept {
    const auto& n = nodes_[static_cast<std::size_t>(node)];
    if (n.parent != kNone && n.is_sink) return Segment::Sink;
    return Segment::Source;
}

}  // namespace mtem
