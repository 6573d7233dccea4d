#include "rfidzone/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>

#include "rfidzone/error.hpp"
#include "rfidzone/rng.hpp"

namespace rfidzone {

// ---------------------------------------------------------------------------
// LabeledDataset

void LabeledDataset::validate() const {
    const std::size_t n = rows.size();
    if (labels.size() != n || tag_of_row.size() != n || session_of_row.size() != n || container_of_row.size() != n ||
        timestamp_of_row.size() != n)
        throw ValidationError("labeled dataset: parallel arrays differ in length");
    for (std::size_t l : labels)
        if (l >= classes.size()) throw ValidationError("labeled dataset: label index out of range");
    for (const FeatureRow& r : rows)
        for (double v : r.values)
            if (!std::isfinite(v)) throw ValidationError("labeled dataset: non-finite feature value");
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
    LabeledDataset out;
    out.classes = classes;
    out.rows.reserve(indices.size());
    out.labels.reserve(indices.size());
    out.tag_of_row.reserve(indices.size());
    out.session_of_row.reserve(indices.size());
    out.container_of_row.reserve(indices.size());
    out.timestamp_of_row.reserve(indices.size());
    for (std::size_t i : indices) {
        out.rows.push_back(rows.at(i));
        out.labels.push_back(labels[i]);
        out.tag_of_row.push_back(tag_of_row[i]);
        out.session_of_row.push_back(session_of_row[i]);
        out.container_of_row.push_back(container_of_row[i]);
        out.timestamp_of_row.push_back(timestamp_of_row[i]);
    }
    return out;
}

std::vector<std::size_t> LabeledDataset::class_counts() const {
    std::vector<std::size_t> counts(classes.size(), 0);
    for (std::size_t l : labels) ++counts.at(l);
    return counts;
}

std::vector<std::uint32_t> LabeledDataset::sessions() const {
    std::set<std::uint32_t> s(session_of_row.begin(), session_of_row.end());
    return {s.begin(), s.end()};
}

// ---------------------------------------------------------------------------
// IP encoding

std::uint32_t encode_reader_ip(std::string_view ip) {
    std::uint32_t code = 0;
    std::size_t pos = 0;
    for (int octet = 0; octet < 4; ++octet) {
        if (octet > 0) {
            if (pos >= ip.size() || ip[pos] != '.') throw ParseError("malformed reader ip '" + std::string(ip) + "'");
            ++pos;
        }
        std::size_t end = pos;
        while (end < ip.size() && ip[end] >= '0' && ip[end] <= '9') ++end;
        if (end == pos || end - pos > 3) throw ParseError("malformed reader ip '" + std::string(ip) + "'");
        unsigned value = 0;
        std::from_chars(ip.data() + pos, ip.data() + end, value);
        if (value > 255) throw ParseError("reader ip octet out of range in '" + std::string(ip) + "'");
        code = (code << 8) | value;
        pos = end;
    }
    if (pos != ip.size()) throw ParseError("malformed reader ip '" + std::string(ip) + "'");
    return code;
}

std::string decode_reader_ip(std::uint32_t code) {
    return std::to_string(code >> 24) + '.' + std::to_string((code >> 16) & 0xff) + '.' +
           std::to_string((code >> 8) & 0xff) + '.' + std::to_string(code & 0xff);
}

// ---------------------------------------------------------------------------
// Null handling and labeling

std::vector<RawRead> drop_nulls(std::span<const RawRead> reads) {
    std::vector<RawRead> out;
    for (const RawRead& r : reads)
        if (r.reader_ip && r.antenna && r.rssi && r.container_id) out.push_back(r);
    return out;
}

ReadSet to_read_set(std::span<const RawRead> reads) {
    ReadSet out;
    out.reserve(reads.size());
    for (std::size_t i = 0; i < reads.size(); ++i) {
        const RawRead& r = reads[i];
        if (!(r.reader_ip && r.antenna && r.rssi && r.container_id))
            throw ValidationError("read " + std::to_string(i) + ": missing required field (run drop_nulls first)");
        if (!r.tag_id || !r.session_id || !r.timestamp)
            throw ValidationError("read " + std::to_string(i) + ": TagId, SessionId and Timestamp are required");
        out.push_back({*r.reader_ip, *r.antenna, *r.rssi, *r.tag_id, *r.container_id, *r.session_id, *r.timestamp});
    }
    return out;
}

namespace {

void push_row(LabeledDataset& ds, const ReadRecord& r, std::size_t label) {
    ds.rows.push_back(FeatureRow::make(encode_reader_ip(r.reader_ip), r.antenna, r.rssi));
    ds.labels.push_back(label);
    ds.tag_of_row.push_back(r.tag_id);
    ds.session_of_row.push_back(r.session_id);
    ds.container_of_row.push_back(r.container_id);
    ds.timestamp_of_row.push_back(r.timestamp);
}

}  // namespace

LabeledDataset label_reads(const ReadSet& reads, const Floorplan& fp) {
    LabeledDataset ds;
    ds.classes = fp.zone_labels();
    for (const ReadRecord& r : reads) {
        auto zone = fp.zone_of_container(r.container_id);
        if (!zone) throw ValidationError("unknown container '" + r.container_id + "'");
        push_row(ds, r, *zone);
    }
    return ds;
}

LabeledDataset label_from_zone_column(std::span<const RawRead> reads, std::vector<std::string> classes) {
    std::map<std::string, std::size_t, std::less<>> index;
    for (std::size_t i = 0; i < classes.size(); ++i) index.emplace(classes[i], i);
    LabeledDataset ds;
    ds.classes = std::move(classes);
    const ReadSet records = to_read_set(reads);
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (!reads[i].zone) throw ValidationError("read " + std::to_string(i) + ": missing Zone");
        auto it = index.find(*reads[i].zone);
        if (it == index.end()) throw ValidationError("read " + std::to_string(i) + ": unknown zone '" + *reads[i].zone + "'");
        push_row(ds, records[i], it->second);
    }
    return ds;
}

// ---------------------------------------------------------------------------
// Stratified subsampling

namespace {

// Hamilton apportionment of `seats` over `weights`, capped by `caps`.
std::vector<std::size_t> largest_remainder(std::span<const double> shares, std::size_t seats,
                                           std::span<const std::size_t> caps) {
    const std::size_t k = shares.size();
    std::vector<std::size_t> quota(k, 0);
    std::vector<double> remainder(k, 0.0);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const double exact = shares[i];
        quota[i] = std::min(static_cast<std::size_t>(std::floor(exact)), caps[i]);
        remainder[i] = quota[i] == caps[i] ? -1.0 : exact - std::floor(exact);
        assigned += quota[i];
    }
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t i : order) {
        if (assigned == seats) break;
        if (quota[i] < caps[i]) {
            ++quota[i];
            ++assigned;
        }
    }
    return quota;
}

}  // namespace

std::vector<std::size_t> stratified_quotas(std::span<const std::size_t> counts, std::size_t target_n) {
    const std::size_t n = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    if (n == 0) throw ValidationError("stratified subsample: empty dataset");
    if (target_n > n)
        throw ValidationError("stratified subsample: target " + std::to_string(target_n) + " exceeds dataset size " +
                              std::to_string(n));
    std::vector<double> shares(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
        shares[i] = static_cast<double>(target_n) * static_cast<double>(counts[i]) / static_cast<double>(n);
    std::vector<std::size_t> quota = largest_remainder(shares, target_n, counts);

    // Shortfall from capped classes is re-apportioned over classes with spare rows.
    std::size_t assigned = std::accumulate(quota.begin(), quota.end(), std::size_t{0});
    while (assigned < target_n) {
        std::vector<double> spare_shares(counts.size(), 0.0);
        std::vector<std::size_t> spare(counts.size(), 0);
        double spare_total = 0.0;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            spare[i] = counts[i] - quota[i];
            spare_total += static_cast<double>(spare[i]);
        }
        const std::size_t missing = target_n - assigned;
        for (std::size_t i = 0; i < counts.size(); ++i)
            spare_shares[i] = static_cast<double>(missing) * static_cast<double>(spare[i]) / spare_total;
        const std::vector<std::size_t> extra = largest_remainder(spare_shares, missing, spare);
        for (std::size_t i = 0; i < counts.size(); ++i) quota[i] += extra[i];
        assigned = std::accumulate(quota.begin(), quota.end(), std::size_t{0});
    }
    return quota;
}

LabeledDataset stratified_subsample(const LabeledDataset& ds, std::size_t target_n, std::uint64_t seed) {
    if (ds.empty()) throw ValidationError("stratified subsample: empty dataset");
    const std::vector<std::size_t> counts = ds.class_counts();
    const std::vector<std::size_t> quota = stratified_quotas(counts, target_n);

    std::vector<std::vector<std::size_t>> members(ds.classes.size());
    for (std::size_t i = 0; i < ds.size(); ++i) members[ds.labels[i]].push_back(i);

    std::vector<std::size_t> chosen;
    chosen.reserve(target_n);
    for (std::size_t k = 0; k < members.size(); ++k) {
        auto& m = members[k];
        // Partial Fisher-Yates: the first quota[k] slots become a uniform sample.
        StreamRng rng(seed, {0x5354524154ULL, k});
        for (std::size_t i = 0; i < quota[k]; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.below(m.size() - i));
            std::swap(m[i], m[j]);
        }
        chosen.insert(chosen.end(), m.begin(), m.begin() + static_cast<std::ptrdiff_t>(quota[k]));
    }
    std::sort(chosen.begin(), chosen.end());
    return ds.subset(chosen);
}

// ---------------------------------------------------------------------------
// Session split

SplitPair session_split(const LabeledDataset& ds, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ValidationError("session split: test fraction must lie in (0, 1)");
    std::map<std::uint32_t, std::size_t> rows_per_session;
    for (std::uint32_t s : ds.session_of_row) ++rows_per_session[s];
    if (rows_per_session.size() < 2) throw ValidationError("session split: need at least 2 distinct sessions");

    std::vector<std::uint32_t> order;
    for (const auto& [s, _] : rows_per_session) order.push_back(s);
    StreamRng rng(seed, {0x53504c4954ULL});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    const double n = static_cast<double>(ds.size());
    const double threshold = test_fraction * n - 1e-9 * n;
    std::set<std::uint32_t> test;
    std::size_t test_rows = 0;
    for (std::uint32_t s : order) {
        if (static_cast<double>(test_rows) >= threshold) break;
        test.insert(s);
        test_rows += rows_per_session[s];
    }

    // Overlap repair: a tag seen on both sides drags all of its sessions into train.
    std::map<std::string, std::set<std::uint32_t>> sessions_of_tag;
    for (std::size_t i = 0; i < ds.size(); ++i) sessions_of_tag[ds.tag_of_row[i]].insert(ds.session_of_row[i]);
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& [tag, sess] : sessions_of_tag) {
            bool in_test = false, in_train = false;
            for (std::uint32_t s : sess) (test.count(s) ? in_test : in_train) = true;
            if (in_test && in_train) {
                for (std::uint32_t s : sess) changed = test.erase(s) > 0 || changed;
            }
        }
    }

    SplitPair out;
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < ds.size(); ++i)
        (test.count(ds.session_of_row[i]) ? test_idx : train_idx).push_back(i);
    if (train_idx.empty() || test_idx.empty())
        throw ValidationError("session split: tag-overlap repair left an empty fold");
    for (const auto& [s, _] : rows_per_session) (test.count(s) ? out.test_sessions : out.train_sessions).push_back(s);
    out.train = ds.subset(train_idx);
    out.test = ds.subset(test_idx);
    return out;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view field, std::size_t line_no, const char* column) {
    if (field.empty()) return std::nullopt;
    T value{};
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw ParseError("reads csv line " + std::to_string(line_no) + ": bad " + column + " '" + std::string(field) +
                         "'");
    return value;
}

std::optional<std::string> parse_text(std::string_view field) {
    if (field.empty()) return std::nullopt;
    return std::string(field);
}

}  // namespace

std::vector<RawRead> read_reads_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("reads csv: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string labeled_header = std::string(kReadCsvHeader) + ",Zone";
    bool labeled = false;
    if (line == labeled_header)
        labeled = true;
    else if (line != kReadCsvHeader)
        throw ParseError("reads csv: unexpected header '" + line + "'");
    const std::size_t columns = labeled ? 8 : 7;

    std::vector<RawRead> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split_fields(line);
        if (f.size() != columns)
            throw ParseError("reads csv line " + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                             " fields, got " + std::to_string(f.size()));
        RawRead r;
        r.reader_ip = parse_text(f[0]);
        r.antenna = parse_number<int>(f[1], line_no, "Antenna");
        r.rssi = parse_number<double>(f[2], line_no, "RSSI");
        if (r.rssi && !std::isfinite(*r.rssi))
            throw ParseError("reads csv line " + std::to_string(line_no) + ": non-finite RSSI");
        r.tag_id = parse_text(f[3]);
        r.container_id = parse_text(f[4]);
        r.session_id = parse_number<std::uint32_t>(f[5], line_no, "SessionId");
        r.timestamp = parse_number<std::uint64_t>(f[6], line_no, "Timestamp");
        if (labeled) r.zone = parse_text(f[7]);
        out.push_back(std::move(r));
    }
    return out;
}

void write_labeled_csv(std::ostream& out, const LabeledDataset& ds) {
    out << kReadCsvHeader << ",Zone\n";
    char rssi[32];
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const FeatureRow& r = ds.rows[i];
        std::snprintf(rssi, sizeof rssi, "%.2f", r.rssi());
        out << decode_reader_ip(r.ip_code()) << ',' << static_cast<long long>(r.antenna()) << ',' << rssi << ','
            << ds.tag_of_row[i] << ',' << ds.container_of_row[i] << ',' << ds.session_of_row[i] << ','
            << ds.timestamp_of_row[i] << ',' << ds.classes[ds.labels[i]] << '\n';
    }
}

}  // namespace rfidzone
