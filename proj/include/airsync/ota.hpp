#pragma once

#include "airsync/clock.hpp"
#include "airsync/rng.hpp"
#include "airsync/sim_time.hpp"

#include <array>
#include <optional>

namespace airsync
{

// ---------------------------------------------------------------------------
// Timing advance

enum class TaKind
{
    Initial, ///< 11-bit random-access response value
    Update,  ///< 6-bit MAC control element
};

inline constexpr int kTaInitialMax = 1282;
inline constexpr int kTaUpdateMax = 63;
inline constexpr int kTaUpdateNoop = 31;

class TaCommand
{
public:
    /// Throws std::invalid_argument outside [0, 1282].
    static TaCommand initial(int value);
    /// Throws std::invalid_argument outside [0, 63].
    static TaCommand update(int value);

    TaKind kind() const { return kind_; }
    int value() const { return value_; }

    /// Initial: value * 16Ts. Update: (value - 31) * 16Ts.
    Ticks advance_ticks() const;

    friend bool operator==(const TaCommand&, const TaCommand&) = default;

private:
    TaCommand(TaKind kind, int value) : kind_(kind), value_(value) {}

    TaKind kind_;
    int value_;
};

inline constexpr std::array<int, 7> kTaTimerValuesMs{500, 750, 1280, 1920, 2560, 5120, 10240};

struct TaTimerConfig
{
    int period_ms = 500;

    /// Throws std::invalid_argument unless period_ms is one of kTaTimerValuesMs.
    void validate() const;
    Ticks period() const { return static_cast<Ticks>(period_ms) * kTicksPerMs; }
};

/// Cumulative TA index held by a UE: an initial value plus the sum of
/// (update - 31) steps, clamped at zero.
class TaState
{
public:
    TaState() = default;
    explicit TaState(int index);

    int index() const { return index_; }
    void apply(const TaCommand& command);

private:
    int index_ = 0;
};

/// floor(rtt / 16Ts), clamped to 1282. Throws std::invalid_argument if rtt < 0.
TaCommand compute_ta_initial(Ticks rtt_measured);

/// 31 + round(misalignment / 16Ts) (half away from zero), clamped to [0, 63].
TaCommand compute_ta_update(Ticks misalignment);

/// Index a command resolves to given the current index. Throws NegativeTaState.
int resolve_ta_index(const TaCommand& command, int current_index);

/// Half the quantized round trip, N * 16Ts / 2 = N * 8Ts.
Ticks one_way_delay_estimate(const TaCommand& command, int current_index);
Ticks one_way_delay_estimate(const TaState& state);

/// Base-station round-trip measurement: 2 * one_way + N(0, sigma), shifted by
/// +/-16Ts with probability wrong_bin_prob, floored at zero.
Ticks measure_rtt(Ticks true_one_way, double noise_sigma, double wrong_bin_prob, RngStream& rng);

// ---------------------------------------------------------------------------
// SIB16 broadcast time

/// Floors t onto the granularity grid; granularity 0 is the identity.
Ticks quantize_broadcast_time(Ticks t, Ticks granularity);

enum class StampMode
{
    AtSchedule, ///< stamped when the SIB is created, sent after a scheduling delay
    AtTransmit, ///< stamped at the actual transmission instant
};

struct SibConfig
{
    Ticks granularity = 0;
    Ticks periodicity = 80 * kTicksPerMs;
    Ticks si_window = 0;
    StampMode stamp_mode = StampMode::AtTransmit;

    void validate() const;
};

struct Sib16Broadcast
{
    SimTime created_at;
    SimTime transmitted_at;
    Ticks stamped = 0; ///< BS reading before quantization
    Ticks value = 0;   ///< broadcast (quantized) time
};

/// Result of a slave clock correction.
struct SyncOutcome
{
    ClockState clock;  ///< corrected clock, last_sync_at set
    Ticks delta = 0;   ///< applied step (subtracted from the reading)
    Ticks pre_error = 0;
    Ticks post_error = 0; ///< error vs reference right after correction
    SimTime applied_at;
};

/// Builds a broadcast created at `create_at`. The scheduling delay is uniform on
/// [0, si_window] in both stamp modes.
Sib16Broadcast sib16_broadcast(const ClockState& bs, const SibConfig& sib, SimTime create_at, RngStream& sched_rng,
                               RngStream& bs_stamp_rng);

/// UE side: sets local time to broadcast value + TA one-way estimate at the
/// reception instant. Throws NoTaState without a TA state.
SyncOutcome sib16_receive(const ClockState& ue, const Sib16Broadcast& broadcast, const std::optional<TaState>& ta,
                          Ticks link_delay, RngStream& ue_stamp_rng);

/// One broadcast-and-receive round for a single UE.
SyncOutcome sib16_sync_cycle(const ClockState& bs, const ClockState& ue, const SibConfig& sib,
                             const std::optional<TaState>& ta, Ticks link_delay, SimTime create_at, RngStream& rng);

// ---------------------------------------------------------------------------
// Two-way exchange

/// t1, t4 on the initiator clock; t2, t3 on the responder clock.
struct ExchangeRecord
{
    Ticks t1 = 0;
    Ticks t2 = 0;
    Ticks t3 = 0;
    Ticks t4 = 0;
};

struct TwoWayEstimate
{
    Ticks offset = 0;          ///< responder minus initiator, truncated toward zero
    Ticks mean_path_delay = 0; ///< truncated toward zero
    bool offset_half_tick = false;
    bool delay_half_tick = false;
};

/// offset = ((t2 - t1) - (t4 - t3)) / 2, delay = ((t2 - t1) + (t4 - t3)) / 2.
/// Odd numerators set the matching half-tick flag. Throws CausalityViolation if t4 < t1.
TwoWayEstimate twoway_offset(const ExchangeRecord& rec);

struct ExchangePath
{
    Ticks downlink_delay = 0; ///< initiator -> responder propagation
    Ticks uplink_delay = 0;   ///< responder -> initiator propagation
    Ticks turnaround = 0;     ///< responder hold time between t2 and t3
    Ticks downlink_sched = 0; ///< stamp-to-air delay of the first message
    Ticks uplink_sched = 0;   ///< stamp-to-air delay of the reply
};

struct Exchange
{
    ExchangeRecord record;
    SimTime completed_at; ///< true time of t4
};

/// Forward-simulates one exchange starting at `start` (true time of t1).
Exchange simulate_exchange(const ClockState& initiator, const ClockState& responder, SimTime start,
                           const ExchangePath& path, RngStream& initiator_stamps, RngStream& responder_stamps);

/// Exchange plus responder step correction by the estimated offset, applied at t4.
SyncOutcome twoway_sync(const ClockState& initiator, const ClockState& responder, SimTime start,
                        const ExchangePath& path, RngStream& initiator_stamps, RngStream& responder_stamps);

// ---------------------------------------------------------------------------
// Inter-BS alignment

enum class RibsMode
{
    ListenOnly,
    ListenWithTaCompensation,
    TwoWay,
};

struct RibsLink
{
    Ticks a_to_b = 0;
    Ticks b_to_a = 0;
    Ticks turnaround = kTicksPerMs;

    static RibsLink symmetric(Ticks delay) { return RibsLink{delay, delay, kTicksPerMs}; }
};

struct RibsOutcome
{
    ClockState bs_b;
    Ticks delta = 0;
    Ticks residual = 0; ///< B minus A right after alignment
    SimTime applied_at;
};

/// Aligns BS-B to BS-A.
///  - ListenOnly: B adopts A's frame timing as heard, so it lags by the propagation delay.
///  - ListenWithTaCompensation: adds the one-way TA estimate of a helper UE co-located
///    with B (throws MissingHelper without one).
///  - TwoWay: two-way exchange initiated by A; leaves half the link asymmetry.
RibsOutcome ribs_align(RibsMode mode, const ClockState& bs_a, const ClockState& bs_b, const RibsLink& link,
                       const std::optional<TaState>& helper_ta, SimTime at, RngStream& rng);

// ---------------------------------------------------------------------------
// Gateway relay

/// Legacy device error becomes GW error + N(0, sigma). Throws GwNotSynced
/// if the gateway has never completed an OTA sync.
SyncOutcome gw_relay_sync(const ClockState& gw, const ClockState& legacy, double local_domain_error_sigma,
                          SimTime at, RngStream& rng);

const char* to_string(StampMode mode);
const char* to_string(RibsMode mode);

} // namespace airsync
