#pragma once

#include "airsync/sim_time.hpp"

#include <cstdint>
#include <functional>
#include <queue>
#include <unordered_set>
#include <vector>

namespace airsync
{

using NodeId = std::uint32_t;
using EventId = std::uint64_t;

enum class EventKind : std::uint8_t
{
    RandomAccess,
    TaTimer,
    BsAlignment,
    SibBroadcast,
    SibReceive,
    TwoWayStart,
    TwoWayComplete,
    GwRelay,
    Sample,
    CommandSend,
    CommandDeliver,
    Fault,
    Custom,
};

const char* to_string(EventKind kind);

struct Event
{
    SimTime fire_at;
    NodeId target = 0;
    EventKind kind = EventKind::Custom;
    /// Insertion order, assigned by the engine; doubles as the event id.
    std::uint64_t sequence = 0;
    /// Opaque handler argument (e.g. an index into per-run side tables).
    std::int64_t arg = 0;
};

/// Single-threaded discrete-event loop over an integer timeline.
///
/// Equal fire times dispatch in insertion order. Handlers may schedule new
/// events at or after now().
class Engine
{
public:
    using Handler = std::function<void(const Event&)>;

    Engine() = default;
    explicit Engine(Handler handler) : handler_(std::move(handler)) {}

    void set_handler(Handler handler) { handler_ = std::move(handler); }

    /// Throws PastEvent if fire_at < now().
    EventId schedule(SimTime fire_at, NodeId target, EventKind kind, std::int64_t arg = 0);
    EventId schedule(const Event& event) { return schedule(event.fire_at, event.target, event.kind, event.arg); }

    /// Tombstones a pending event; it is dropped when it reaches the queue head.
    void cancel(EventId id);

    /// Dispatches every event with fire_at <= t_end, then sets now() = t_end.
    std::size_t run_until(SimTime t_end);

    SimTime now() const { return now_; }
    std::size_t pending() const { return live_.size(); }
    std::uint64_t dispatched_total() const { return dispatched_total_; }
    /// FNV-1a digest of (fire_at, target, kind, arg) over every dispatched event.
    std::uint64_t trace_digest() const { return digest_; }

private:
    struct Later
    {
        bool operator()(const Event& a, const Event& b) const
        {
            if (a.fire_at != b.fire_at)
            {
                return a.fire_at > b.fire_at;
            }
            return a.sequence > b.sequence;
        }
    };

    void fold_into_digest(const Event& ev);

    Handler handler_;
    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    std::unordered_set<EventId> live_;
    SimTime now_;
    std::uint64_t next_sequence_ = 0;
    std::uint64_t dispatched_total_ = 0;
    std::uint64_t digest_ = 0xcbf29ce484222325ull;
};

} // namespace airsync
