#include "airsync/ota.hpp"

#include "airsync/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace airsync
{

TaCommand TaCommand::initial(int value)
{
    if (value < 0 || value > kTaInitialMax)
    {
        throw std::invalid_argument("initial TA value " + std::to_string(value) + " outside [0, 1282]");
    }
    return TaCommand(TaKind::Initial, value);
}

TaCommand TaCommand::update(int value)
{
    if (value < 0 || value > kTaUpdateMax)
    {
        throw std::invalid_argument("TA update value " + std::to_string(value) + " outside [0, 63]");
    }
    return TaCommand(TaKind::Update, value);
}

Ticks TaCommand::advance_ticks() const
{
    const int steps = kind_ == TaKind::Initial ? value_ : value_ - kTaUpdateNoop;
    return static_cast<Ticks>(steps) * kTaStep;
}

void TaTimerConfig::validate() const
{
    if (std::find(kTaTimerValuesMs.begin(), kTaTimerValuesMs.end(), period_ms) == kTaTimerValuesMs.end())
    {
        throw std::invalid_argument("TA timer " + std::to_string(period_ms) +
                                    " ms is not one of {500, 750, 1280, 1920, 2560, 5120, 10240}");
    }
}

TaState::TaState(int index) : index_(index)
{
    if (index < 0)
    {
        throw NegativeTaState("TA index must be >= 0");
    }
}

void TaState::apply(const TaCommand& command)
{
    if (command.kind() == TaKind::Initial)
    {
        index_ = command.value();
        return;
    }
    index_ = std::max(0, index_ + command.value() - kTaUpdateNoop);
}

TaCommand compute_ta_initial(Ticks rtt_measured)
{
    if (rtt_measured < 0)
    {
        throw std::invalid_argument("compute_ta_initial: negative round trip");
    }
    const Ticks steps = rtt_measured / kTaStep;
    return TaCommand::initial(static_cast<int>(std::min<Ticks>(steps, kTaInitialMax)));
}

TaCommand compute_ta_update(Ticks misalignment)
{
    Ticks q = misalignment / kTaStep;
    const Ticks r = misalignment % kTaStep;
    if (2 * (r < 0 ? -r : r) >= kTaStep)
    {
        q += misalignment < 0 ? -1 : 1;
    }
    const Ticks value = std::clamp<Ticks>(kTaUpdateNoop + q, 0, kTaUpdateMax);
    return TaCommand::update(static_cast<int>(value));
}

int resolve_ta_index(const TaCommand& command, int current_index)
{
    const int index = command.kind() == TaKind::Initial ? command.value()
                                                         : current_index + command.value() - kTaUpdateNoop;
    if (index < 0)
    {
        throw NegativeTaState("TA index would become " + std::to_string(index));
    }
    return index;
}

Ticks one_way_delay_estimate(const TaCommand& command, int current_index)
{
    return static_cast<Ticks>(resolve_ta_index(command, current_index)) * kTaStep / 2;
}

Ticks one_way_delay_estimate(const TaState& state)
{
    return static_cast<Ticks>(state.index()) * kTaStep / 2;
}

Ticks measure_rtt(Ticks true_one_way, double noise_sigma, double wrong_bin_prob, RngStream& rng)
{
    if (true_one_way < 0)
    {
        throw std::invalid_argument("measure_rtt: negative one-way delay");
    }
    if (!(wrong_bin_prob >= 0.0 && wrong_bin_prob <= 1.0))
    {
        throw std::invalid_argument("measure_rtt: wrong_bin_prob outside [0, 1]");
    }
    Ticks rtt = checked_add(checked_mul(true_one_way, 2), std::llround(rng.normal(noise_sigma)));
    const bool wrong_bin = rng.bernoulli(wrong_bin_prob);
    const bool upward = rng.uniform01() < 0.5;
    if (wrong_bin)
    {
        rtt += upward ? kTaStep : -kTaStep;
    }
    return std::max<Ticks>(rtt, 0);
}

Ticks quantize_broadcast_time(Ticks t, Ticks granularity)
{
    if (granularity < 0)
    {
        throw std::invalid_argument("quantize_broadcast_time: negative granularity");
    }
    if (granularity == 0)
    {
        return t;
    }
    Ticks q = t / granularity;
    if (t % granularity != 0 && t < 0)
    {
        --q;
    }
    return q * granularity;
}

void SibConfig::validate() const
{
    if (granularity < 0)
    {
        throw std::invalid_argument("SIB granularity must be >= 0");
    }
    if (periodicity <= 0)
    {
        throw std::invalid_argument("SIB periodicity must be > 0");
    }
    if (si_window < 0 || si_window > periodicity)
    {
        throw std::invalid_argument("SI window must lie in [0, periodicity]");
    }
}

Sib16Broadcast sib16_broadcast(const ClockState& bs, const SibConfig& sib, SimTime create_at, RngStream& sched_rng,
                               RngStream& bs_stamp_rng)
{
    Sib16Broadcast out;
    out.created_at = create_at;
    out.transmitted_at = create_at + sched_rng.uniform_int(0, sib.si_window);
    const SimTime stamp_at = sib.stamp_mode == StampMode::AtSchedule ? out.created_at : out.transmitted_at;
    out.stamped = stamp(bs, stamp_at, bs_stamp_rng);
    out.value = quantize_broadcast_time(out.stamped, sib.granularity);
    return out;
}

SyncOutcome sib16_receive(const ClockState& ue, const Sib16Broadcast& broadcast, const std::optional<TaState>& ta,
                          Ticks link_delay, RngStream& ue_stamp_rng)
{
    if (!ta)
    {
        throw NoTaState("sib16_receive: UE has no timing advance state");
    }
    SyncOutcome out;
    out.applied_at = broadcast.transmitted_at + link_delay;
    const Ticks target = checked_add(broadcast.value, one_way_delay_estimate(*ta));
    const Ticks reading = stamp(ue, out.applied_at, ue_stamp_rng);
    out.pre_error = clock_error(ue, out.applied_at);
    out.delta = checked_add(reading, -target);
    out.clock = apply_offset_correction(ue, out.delta);
    out.clock.last_sync_at = out.applied_at;
    out.post_error = clock_error(out.clock, out.applied_at);
    return out;
}

SyncOutcome sib16_sync_cycle(const ClockState& bs, const ClockState& ue, const SibConfig& sib,
                             const std::optional<TaState>& ta, Ticks link_delay, SimTime create_at, RngStream& rng)
{
    if (!ta)
    {
        throw NoTaState("sib16_sync_cycle: UE has no timing advance state");
    }
    const Sib16Broadcast broadcast = sib16_broadcast(bs, sib, create_at, rng, rng);
    return sib16_receive(ue, broadcast, ta, link_delay, rng);
}

TwoWayEstimate twoway_offset(const ExchangeRecord& rec)
{
    if (rec.t4 < rec.t1)
    {
        throw CausalityViolation("twoway_offset: t4 precedes t1");
    }
    const Ticks forward = checked_add(rec.t2, -rec.t1);
    const Ticks backward = checked_add(rec.t4, -rec.t3);
    const Ticks offset_num = checked_add(forward, -backward);
    const Ticks delay_num = checked_add(forward, backward);
    TwoWayEstimate out;
    out.offset = offset_num / 2;
    out.mean_path_delay = delay_num / 2;
    out.offset_half_tick = offset_num % 2 != 0;
    out.delay_half_tick = delay_num % 2 != 0;
    return out;
}

Exchange simulate_exchange(const ClockState& initiator, const ClockState& responder, SimTime start,
                           const ExchangePath& path, RngStream& initiator_stamps, RngStream& responder_stamps)
{
    Exchange out;
    out.record.t1 = stamp(initiator, start, initiator_stamps);
    const SimTime arrive = start + checked_add(path.downlink_sched, path.downlink_delay);
    out.record.t2 = stamp(responder, arrive, responder_stamps);
    const SimTime reply = arrive + path.turnaround;
    out.record.t3 = stamp(responder, reply, responder_stamps);
    out.completed_at = reply + checked_add(path.uplink_sched, path.uplink_delay);
    out.record.t4 = stamp(initiator, out.completed_at, initiator_stamps);
    return out;
}

SyncOutcome twoway_sync(const ClockState& initiator, const ClockState& responder, SimTime start,
                        const ExchangePath& path, RngStream& initiator_stamps, RngStream& responder_stamps)
{
    const Exchange ex = simulate_exchange(initiator, responder, start, path, initiator_stamps, responder_stamps);
    const TwoWayEstimate est = twoway_offset(ex.record);
    SyncOutcome out;
    out.applied_at = ex.completed_at;
    out.pre_error = clock_error(responder, out.applied_at);
    out.delta = est.offset;
    out.clock = apply_offset_correction(responder, out.delta);
    out.clock.last_sync_at = out.applied_at;
    out.post_error = clock_error(out.clock, out.applied_at);
    return out;
}

RibsOutcome ribs_align(RibsMode mode, const ClockState& bs_a, const ClockState& bs_b, const RibsLink& link,
                       const std::optional<TaState>& helper_ta, SimTime at, RngStream& rng)
{
    RibsOutcome out;
    if (mode == RibsMode::TwoWay)
    {
        const ExchangePath path{link.a_to_b, link.b_to_a, link.turnaround, 0, 0};
        const SyncOutcome s = twoway_sync(bs_a, bs_b, at, path, rng, rng);
        out.bs_b = s.clock;
        out.delta = s.delta;
        out.applied_at = s.applied_at;
    }
    else
    {
        if (mode == RibsMode::ListenWithTaCompensation && !helper_ta)
        {
            throw MissingHelper("ribs_align: TA-compensated listening needs a helper UE TA state");
        }
        const Ticks heard = stamp(bs_a, at, rng);
        out.applied_at = at + link.a_to_b;
        const Ticks reading = stamp(bs_b, out.applied_at, rng);
        const Ticks compensation = mode == RibsMode::ListenWithTaCompensation ? one_way_delay_estimate(*helper_ta) : 0;
        out.delta = checked_add(reading, -checked_add(heard, compensation));
        out.bs_b = apply_offset_correction(bs_b, out.delta);
        out.bs_b.last_sync_at = out.applied_at;
    }
    out.residual = checked_add(clock_error(out.bs_b, out.applied_at), -clock_error(bs_a, out.applied_at));
    return out;
}

SyncOutcome gw_relay_sync(const ClockState& gw, const ClockState& legacy, double local_domain_error_sigma,
                          SimTime at, RngStream& rng)
{
    if (!gw.last_sync_at)
    {
        throw GwNotSynced("gw_relay_sync: gateway has not completed an OTA sync");
    }
    const Ticks target = checked_add(local_time(gw, at), std::llround(rng.normal(local_domain_error_sigma)));
    SyncOutcome out;
    out.applied_at = at;
    out.pre_error = clock_error(legacy, at);
    out.delta = checked_add(local_time(legacy, at), -target);
    out.clock = apply_offset_correction(legacy, out.delta);
    out.clock.last_sync_at = at;
    out.post_error = clock_error(out.clock, at);
    return out;
}

const char* to_string(StampMode mode)
{
    return mode == StampMode::AtSchedule ? "at_schedule" : "at_transmit";
}

const char* to_string(RibsMode mode)
{
    switch (mode)
    {
    case RibsMode::ListenOnly: return "listen_only";
    case RibsMode::ListenWithTaCompensation: return "listen_with_ta";
    case RibsMode::TwoWay: return "two_way";
    }
    return "unknown";
}

} // namespace airsync
