#include "airsync/engine.hpp"

#include "airsync/errors.hpp"

namespace airsync
{

const char* to_string(EventKind kind)
{
    switch (kind)
    {
    case EventKind::RandomAccess: return "random_access";
    case EventKind::TaTimer: return "ta_timer";
    case EventKind::BsAlignment: return "bs_alignment";
    case EventKind::SibBroadcast: return "sib_broadcast";
    case EventKind::SibReceive: return "sib_receive";
    case EventKind::TwoWayStart: return "twoway_start";
    case EventKind::TwoWayComplete: return "twoway_complete";
    case EventKind::GwRelay: return "gw_relay";
    case EventKind::Sample: return "sample";
    case EventKind::CommandSend: return "command_send";
    case EventKind::CommandDeliver: return "command_deliver";
    case EventKind::Fault: return "fault";
    case EventKind::Custom: return "custom";
    }
    return "unknown";
}

EventId Engine::schedule(SimTime fire_at, NodeId target, EventKind kind, std::int64_t arg)
{
    if (fire_at < now_)
    {
        throw PastEvent("schedule: fire_at " + std::to_string(fire_at.ticks()) + " is before now " +
                        std::to_string(now_.ticks()));
    }
    const EventId id = next_sequence_++;
    queue_.push(Event{fire_at, target, kind, id, arg});
    live_.insert(id);
    return id;
}

void Engine::cancel(EventId id)
{
    live_.erase(id);
}

std::size_t Engine::run_until(SimTime t_end)
{
    if (t_end < now_)
    {
        throw PastEvent("run_until: t_end is before now");
    }
    std::size_t count = 0;
    while (!queue_.empty() && queue_.top().fire_at <= t_end)
    {
        const Event ev = queue_.top();
        queue_.pop();
        if (live_.erase(ev.sequence) == 0)
        {
            continue; // tombstoned
        }
        now_ = ev.fire_at;
        fold_into_digest(ev);
        ++count;
        ++dispatched_total_;
        if (handler_)
        {
            handler_(ev);
        }
    }
    now_ = t_end;
    return count;
}

void Engine::fold_into_digest(const Event& ev)
{
    auto mix = [this](std::uint64_t v) {
        for (int i = 0; i < 8; ++i)
        {
            digest_ ^= (v >> (8 * i)) & 0xffu;
            digest_ *= 0x100000001b3ull;
        }
    };
    mix(ev.fire_at.ticks());
    mix(ev.target);
    mix(static_cast<std::uint64_t>(ev.kind));
    mix(static_cast<std::uint64_t>(ev.arg));
}

} // namespace airsync
