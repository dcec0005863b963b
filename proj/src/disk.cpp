#include "rda/disk.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <stdexcept>

#include <json.hpp>

namespace rda {

using nlohmann::json;

Disk::Disk(std::size_t capacity_, long max_delay_) : capacity(capacity_), max_delay(max_delay_) {
    if (capacity < 1) throw std::invalid_argument("disk capacity must be >= 1");
    if (max_delay < 1) throw std::invalid_argument("disk max_delay must be >= 1");
}

Disk push(Disk disk, RewardCell cell, long now) {
    if (!std::isfinite(cell.value)) throw std::invalid_argument("non-finite reward");
    if (cell.origin_step != now)
        throw std::invalid_argument("pushed reward must originate at the current step");
    if (!disk.cells.empty() && disk.cells.back().origin_step >= cell.origin_step)
        throw std::invalid_argument("duplicate or out-of-order origin step");
    if (disk.full()) throw std::length_error("disk is full; publish or drop before pushing");
    disk.cells.push_back(cell);
    return disk;
}

EvictResult evict_expired(Disk disk, long now) {
    EvictResult result;
    std::vector<RewardCell> kept;
    kept.reserve(disk.cells.size());
    for (const auto& cell : disk.cells) {
        if (now - cell.origin_step > disk.max_delay)
            result.dropped.push_back(cell);
        else
            kept.push_back(cell);
    }
    disk.cells = std::move(kept);
    result.disk = std::move(disk);
    return result;
}

DelayPublication publish_delay(Disk disk, std::size_t index, long now) {
    if (disk.cells.empty()) throw std::logic_error("publish from an empty disk");
    if (index >= disk.cells.size()) throw std::out_of_range("disk index out of range");
    if (disk.age(index, now) > disk.max_delay)
        throw std::logic_error("selected reward exceeds the delay bound");
    DelayPublication result;
    result.cell = disk.cells[index];
    result.reward = result.cell.value;
    disk.cells.erase(disk.cells.begin() + static_cast<std::ptrdiff_t>(index));
    result.disk = std::move(disk);
    return result;
}

ShiftPublication publish_shift(Disk disk, std::size_t drop_index, std::size_t max_drop) {
    if (max_drop >= disk.capacity)
        throw std::invalid_argument("max drop index must be below the disk capacity");
    if (!disk.full()) throw std::logic_error("reward shifting acts only on a full disk");
    if (drop_index > max_drop) throw std::out_of_range("drop index exceeds the maximum");
    ShiftPublication result;
    const auto split = disk.cells.begin() + static_cast<std::ptrdiff_t>(drop_index + 1);
    result.dropped.assign(disk.cells.begin(), split);
    result.published.assign(split, disk.cells.end());
    disk.cells.clear();
    result.disk = std::move(disk);
    return result;
}

std::string to_string(AttackMode mode) {
    switch (mode) {
        case AttackMode::none: return "none";
        case AttackMode::delay: return "delay";
        case AttackMode::shift: return "shift";
    }
    return "none";
}

AttackMode attack_mode_from_string(const std::string& name) {
    if (name == "none") return AttackMode::none;
    if (name == "delay") return AttackMode::delay;
    if (name == "shift") return AttackMode::shift;
    throw std::invalid_argument("unknown attack mode '" + name + "'");
}

std::string to_json_line(const TraceRecord& r) {
    json j;
    j["now"] = r.now;
    j["episode"] = r.episode;
    j["generated"] = r.generated ? json::array({r.generated->origin_step, r.generated->value})
                                 : json(nullptr);
    j["action"] = r.action ? json(*r.action) : json(nullptr);
    json published = json::array();
    for (const auto& c : r.published) published.push_back(json::array({c.origin_step, c.value}));
    j["published"] = std::move(published);
    j["expired"] = r.expired;
    j["shift_dropped"] = r.shift_dropped;
    j["residual"] = r.residual;
    return j.dump();
}

TraceRecord parse_trace_line(const std::string& line) {
    TraceRecord r;
    try {
        const json j = json::parse(line);
        r.now = j.at("now").get<long>();
        r.episode = j.at("episode").get<int>();
        const auto& gen = j.at("generated");
        if (!gen.is_null()) r.generated = RewardCell{gen.at(1).get<double>(), gen.at(0).get<long>()};
        const auto& action = j.at("action");
        if (!action.is_null()) r.action = action.get<long>();
        for (const auto& item : j.at("published"))
            r.published.push_back({item.at(1).get<double>(), item.at(0).get<long>()});
        r.expired = j.at("expired").get<std::vector<long>>();
        r.shift_dropped = j.at("shift_dropped").get<std::vector<long>>();
        r.residual = j.at("residual").get<std::vector<long>>();
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("malformed trace record: ") + e.what());
    }
    return r;
}

void StreamVerifier::observe(long publish_step, long origin_step) {
    ++report_.published;
    const long delay = publish_step - origin_step;
    if (delay > report_.max_delay_seen) report_.max_delay_seen = delay;
    if (delay > max_delay_ || delay < 0) ++report_.delay_violations;
    if (last_origin_ && origin_step <= *last_origin_) ++report_.order_violations;
    last_origin_ = origin_step;
}

void StreamVerifier::observe(const TraceRecord& record) {
    ++report_.records;
    for (const auto& cell : record.published) observe(record.now, cell.origin_step);
}

bool stream_is_legal(const StreamReport& report, AttackMode mode) {
    if (report.delay_violations != 0) return false;
    return mode != AttackMode::shift || report.order_violations == 0;
}

StreamReport verify_stream(std::istream& trace, AttackMode mode, long max_delay) {
    StreamVerifier verifier(mode == AttackMode::none ? 0 : max_delay);
    std::string line;
    long line_no = 0;
    while (std::getline(trace, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            verifier.observe(parse_trace_line(line));
        } catch (const std::runtime_error& e) {
            throw std::runtime_error("trace line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return verifier.report();
}

StreamReport verify_stream(const std::string& trace_path, AttackMode mode, long max_delay) {
    std::ifstream in(trace_path);
    if (!in) throw std::runtime_error("cannot open trace '" + trace_path + "'");
    return verify_stream(in, mode, max_delay);
}

}  // namespace rda
