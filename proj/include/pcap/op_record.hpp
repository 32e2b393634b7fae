#pragma once

#include <charconv>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "pcap/time.hpp"

namespace pcap {

enum class OpKind : std::uint8_t { Read, Write };

// The value returned by a read that observed the initial default value.
// Modeled as a virtual write with start time 0 so freshness logic needs no
// special case.
inline constexpr std::int64_t kDefaultWriteId = -1;

// One completed read or write. The unit of all metric computation.
struct OpRecord {
    std::int64_t op_id = 0;
    OpKind kind = OpKind::Read;
    std::int32_t key = 0;
    // For a write: its own op_id. For a read: the op_id of the write whose
    // value was returned, or kDefaultWriteId.
    std::int64_t write_id = 0;
    TimePoint start = 0;
    TimePoint finish = 0;
    std::int32_t origin_server = 0;

    bool operator==(const OpRecord&) const = default;
};

using OpLog = std::vector<OpRecord>;

enum class LogErrorKind { DanglingWriteRef, NegativeSpan };

struct LogError {
    LogErrorKind kind;
    std::int64_t op_id;
};

// Returns the first invariant violation, or nullopt when the log is valid:
// finish >= start everywhere, writes reference themselves, and every read
// references DEFAULT or a write present in the log.
inline std::optional<LogError> validate_log(std::span<const OpRecord> log) {
    std::unordered_set<std::int64_t> write_ids;
    write_ids.reserve(log.size());
    for (const OpRecord& op : log) {
        if (op.kind == OpKind::Write) write_ids.insert(op.op_id);
    }
    for (const OpRecord& op : log) {
        if (op.finish < op.start || op.start < 0) {
            return LogError{LogErrorKind::NegativeSpan, op.op_id};
        }
        if (op.kind == OpKind::Write) {
            if (op.write_id != op.op_id) {
                return LogError{LogErrorKind::DanglingWriteRef, op.op_id};
            }
        } else if (op.write_id != kDefaultWriteId && !write_ids.contains(op.write_id)) {
            return LogError{LogErrorKind::DanglingWriteRef, op.op_id};
        }
    }
    return std::nullopt;
}

// Wire format: op_id,kind,key,write_id,start_us,finish_us,origin_server
// with kind encoded as R or W and the DEFAULT write id as -1.
inline std::string serialize_record(const OpRecord& op) {
    std::string out;
    out.reserve(64);
    out += std::to_string(op.op_id);
    out += op.kind == OpKind::Read ? ",R," : ",W,";
    out += std::to_string(op.key);
    out += ',';
    out += std::to_string(op.write_id);
    out += ',';
    out += std::to_string(op.start);
    out += ',';
    out += std::to_string(op.finish);
    out += ',';
    out += std::to_string(op.origin_server);
    return out;
}

inline std::string serialize_log(std::span<const OpRecord> log) {
    std::string out;
    for (const OpRecord& op : log) {
        out += serialize_record(op);
        out += '\n';
    }
    return out;
}

namespace detail {
template <typename T>
T parse_int(std::string_view field, const char* what) {
    T value{};
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw std::runtime_error(std::string("bad log field: ") + what);
    }
    return value;
}
} // namespace detail

inline OpRecord parse_record(std::string_view line) {
    std::string_view fields[7];
    std::size_t n = 0;
    while (n < 7) {
        std::size_t comma = line.find(',');
        if (comma == std::string_view::npos) {
            fields[n++] = line;
            line = {};
            break;
        }
        fields[n++] = line.substr(0, comma);
        line.remove_prefix(comma + 1);
    }
    if (n != 7 || !line.empty()) throw std::runtime_error("bad log line: want 7 fields");
    OpRecord op;
    op.op_id = detail::parse_int<std::int64_t>(fields[0], "op_id");
    if (fields[1] == "R") {
        op.kind = OpKind::Read;
    } else if (fields[1] == "W") {
        op.kind = OpKind::Write;
    } else {
        throw std::runtime_error("bad log field: kind");
    }
    op.key = detail::parse_int<std::int32_t>(fields[2], "key");
    op.write_id = detail::parse_int<std::int64_t>(fields[3], "write_id");
    op.start = detail::parse_int<std::int64_t>(fields[4], "start_us");
    op.finish = detail::parse_int<std::int64_t>(fields[5], "finish_us");
    op.origin_server = detail::parse_int<std::int32_t>(fields[6], "origin_server");
    return op;
}

inline OpLog parse_log(std::string_view text) {
    OpLog log;
    while (!text.empty()) {
        std::size_t nl = text.find('\n');
        std::string_view line = nl == std::string_view::npos ? text : text.substr(0, nl);
        if (!line.empty()) log.push_back(parse_record(line));
        if (nl == std::string_view::npos) break;
        text.remove_prefix(nl + 1);
    }
    return log;
}

} // namespace pcap
