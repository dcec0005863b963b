#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rda {

/// A withheld reward and the global learner step that generated it.
struct RewardCell {
    double value = 0.0;
    long origin_step = 0;
    friend bool operator==(const RewardCell&, const RewardCell&) = default;
};

/// The attacker's bounded buffer. Cells are kept oldest first with strictly
/// increasing origin steps. A cell of age `max_delay` is still publishable;
/// age `max_delay + 1` is expired.
struct Disk {
    std::size_t capacity = 8;
    long max_delay = 8;
    std::vector<RewardCell> cells;

    Disk() = default;
    Disk(std::size_t capacity, long max_delay);

    std::size_t size() const { return cells.size(); }
    bool empty() const { return cells.empty(); }
    bool full() const { return cells.size() >= capacity; }
    long age(std::size_t index, long now) const { return now - cells.at(index).origin_step; }
};

/// Appends `cell`. Requires cell.origin_step == now and a non-full disk.
Disk push(Disk disk, RewardCell cell, long now);

struct EvictResult {
    Disk disk;
    std::vector<RewardCell> dropped;
};

/// Removes every cell older than max_delay.
EvictResult evict_expired(Disk disk, long now);

struct DelayPublication {
    double reward = 0.0;
    RewardCell cell;
    Disk disk;
};

/// Removes the cell at `index` and returns it as the reward delivered at `now`.
DelayPublication publish_delay(Disk disk, std::size_t index, long now);

struct ShiftPublication {
    std::vector<RewardCell> published;
    std::vector<RewardCell> dropped;
    Disk disk;
};

/// Drops cells [0, drop_index] and publishes the rest in order, leaving the
/// disk empty. Requires a full disk and drop_index <= max_drop < capacity.
ShiftPublication publish_shift(Disk disk, std::size_t drop_index, std::size_t max_drop);

enum class AttackMode { none, delay, shift };

std::string to_string(AttackMode mode);
AttackMode attack_mode_from_string(const std::string& name);

/// One line of the attack trace: what happened to the reward stream at
/// global step `now`.
struct TraceRecord {
    long now = 0;
    int episode = 0;
    std::optional<RewardCell> generated;
    std::optional<long> action;
    std::vector<RewardCell> published;
    std::vector<long> expired;
    std::vector<long> shift_dropped;
    std::vector<long> residual;
};

std::string to_json_line(const TraceRecord& record);
/// Throws std::runtime_error on malformed input.
TraceRecord parse_trace_line(const std::string& line);

struct StreamReport {
    long records = 0;
    long published = 0;
    long delay_violations = 0;  // publish_step - origin_step > max_delay
    long order_violations = 0;  // origin not above the previously published origin
    long max_delay_seen = 0;
};

/// Secure-timestamp audit over a published stream, in publication order.
class StreamVerifier {
public:
    explicit StreamVerifier(long max_delay) : max_delay_(max_delay) {}
    void observe(long publish_step, long origin_step);
    void observe(const TraceRecord& record);
    const StreamReport& report() const { return report_; }

private:
    long max_delay_;
    std::optional<long> last_origin_;
    StreamReport report_;
};

/// Delay mode must respect the delay bound; shift mode must additionally
/// preserve order.
bool stream_is_legal(const StreamReport& report, AttackMode mode);

StreamReport verify_stream(std::istream& trace, AttackMode mode, long max_delay);
StreamReport verify_stream(const std::string& trace_path, AttackMode mode, long max_delay);

}  // namespace rda
