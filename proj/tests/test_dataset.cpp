#include <doctest.h>

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "rfidzone/dataset.hpp"
#include "rfidzone/error.hpp"

using namespace rfidzone;

namespace {

// rows_per_session[s] rows in session s; each session has its own tags.
LabeledDataset sessions_dataset(const std::vector<std::size_t>& rows_per_session, std::size_t tags_per_session = 3) {
    LabeledDataset ds;
    ds.classes = {"LabZoneA", "LabZoneB"};
    std::uint64_t ts = 0;
    for (std::size_t s = 0; s < rows_per_session.size(); ++s)
        for (std::size_t i = 0; i < rows_per_session[s]; ++i) {
            ds.rows.push_back(FeatureRow::make(3232235786u, 1 + static_cast<int>(i % 2), -50.0 - static_cast<double>(i)));
            ds.labels.push_back(i % 2);
            ds.tag_of_row.push_back("T" + std::to_string(s) + "-" + std::to_string(i % tags_per_session));
            ds.session_of_row.push_back(static_cast<std::uint32_t>(s));
            ds.container_of_row.push_back("C" + std::to_string(i % 2));
            ds.timestamp_of_row.push_back(ts++);
        }
    return ds;
}

LabeledDataset class_dataset(const std::vector<std::size_t>& counts) {
    LabeledDataset ds;
    for (std::size_t k = 0; k < counts.size(); ++k) ds.classes.push_back("Z" + std::to_string(100 + k));
    std::uint64_t ts = 0;
    // Interleave classes so source order differs from class order.
    const std::size_t most = *std::max_element(counts.begin(), counts.end());
    for (std::size_t i = 0; i < most; ++i)
        for (std::size_t k = 0; k < counts.size(); ++k)
            if (i < counts[k]) {
                ds.rows.push_back(FeatureRow::make(1, 1, static_cast<double>(ts)));
                ds.labels.push_back(k);
                ds.tag_of_row.push_back("T" + std::to_string(ts));
                ds.session_of_row.push_back(static_cast<std::uint32_t>(ts % 5));
                ds.container_of_row.push_back("C");
                ds.timestamp_of_row.push_back(ts++);
            }
    return ds;
}

RawRead raw(std::optional<std::string> ip, std::optional<int> ant, std::optional<double> rssi,
            std::optional<std::string> container) {
    return {ip, ant, rssi, std::string("T"), container, 0u, 0u, std::nullopt};
}

}  // namespace

TEST_CASE("reader ip encoding") {
    CHECK(encode_reader_ip("0.0.0.1") == 1u);
    CHECK(encode_reader_ip("255.255.255.255") == 4294967295u);
    CHECK(encode_reader_ip("192.168.1.10") == 3232235786u);
    CHECK(encode_reader_ip("0.0.0.0") == 0u);
    CHECK(decode_reader_ip(3232235786u) == "192.168.1.10");
    for (const char* bad : {"", "1.2.3", "1.2.3.4.5", "256.0.0.1", "1..2.3", "a.b.c.d", "1.2.3.4 ", " 1.2.3.4", "1.2.3.-4",
                            "1.2.3.1234"})
        CHECK_THROWS_AS(encode_reader_ip(bad), ParseError);
}

TEST_CASE("reader ip encoding is injective and order preserving on random addresses") {
    std::mt19937_64 gen(3);
    for (int i = 0; i < 2000; ++i) {
        const auto code = static_cast<std::uint32_t>(gen());
        const std::string ip = decode_reader_ip(code);
        CHECK(encode_reader_ip(ip) == code);
    }
    CHECK(encode_reader_ip("10.0.0.255") < encode_reader_ip("10.0.1.0"));
}

TEST_CASE("drop_nulls keeps only complete records, in order") {
    const std::vector<RawRead> reads = {
        raw("1.1.1.1", 1, -50.0, "C1"), raw(std::nullopt, 1, -50.0, "C1"), raw("1.1.1.1", std::nullopt, -50.0, "C1"),
        raw("1.1.1.1", 1, std::nullopt, "C1"), raw("1.1.1.1", 1, -50.0, std::nullopt), raw("2.2.2.2", 2, -60.0, "C2"),
    };
    const auto kept = drop_nulls(reads);
    REQUIRE(kept.size() == 2);
    CHECK(*kept[0].reader_ip == "1.1.1.1");
    CHECK(*kept[1].reader_ip == "2.2.2.2");
    CHECK(drop_nulls(std::vector<RawRead>{}).empty());

    std::vector<RawRead> incomplete = {raw("1.1.1.1", 1, -50.0, "C1")};
    incomplete[0].session_id.reset();
    CHECK_THROWS_AS(to_read_set(incomplete), ValidationError);
}

TEST_CASE("label_reads follows the container map") {
    const std::vector<Reader> readers = {{"10.0.0.1", {{1, {1.0, 1.0}, -80.0}}}};
    const Floorplan fp({{"LabZoneA", {0, 0, 1, 1}}, {"LabZoneB", {1, 0, 2, 1}}, {"LabZoneC", {2, 0, 3, 1}}}, readers,
                       {{"CA", {0.5, 0.5}, {"T1"}}, {"CC", {2.5, 0.5}, {"T2"}}});
    const ReadSet reads = {{"10.0.0.1", 1, -50, "T1", "CA", 0, 0},
                           {"10.0.0.1", 1, -51, "T1", "CA", 0, 1},
                           {"10.0.0.1", 1, -52, "T2", "CC", 1, 2}};
    const LabeledDataset ds = label_reads(reads, fp);
    CHECK(ds.labels == std::vector<std::size_t>{0, 0, 2});
    CHECK(ds.classes == std::vector<std::string>{"LabZoneA", "LabZoneB", "LabZoneC"});
    CHECK(ds.rows[2] == FeatureRow::make(encode_reader_ip("10.0.0.1"), 1, -52));
    CHECK(ds.class_counts() == std::vector<std::size_t>{2, 0, 1});
    CHECK(ds.sessions() == std::vector<std::uint32_t>{0, 1});

    const ReadSet stray = {{"10.0.0.1", 1, -50, "T9", "NOPE", 0, 0}};
    CHECK_THROWS_WITH_AS(label_reads(stray, fp), doctest::Contains("unknown container 'NOPE'"), ValidationError);
}

TEST_CASE("label_from_zone_column") {
    std::vector<RawRead> reads = {raw("1.1.1.1", 1, -50.0, "C1"), raw("1.1.1.1", 2, -60.0, "C2")};
    reads[0].zone = "LabZoneB";
    reads[1].zone = "LabZoneA";
    const auto ds = label_from_zone_column(reads, {"LabZoneA", "LabZoneB"});
    CHECK(ds.labels == std::vector<std::size_t>{1, 0});
    reads[1].zone = "LabZoneQ";
    CHECK_THROWS_AS(label_from_zone_column(reads, {"LabZoneA", "LabZoneB"}), ValidationError);
    reads[1].zone.reset();
    CHECK_THROWS_AS(label_from_zone_column(reads, {"LabZoneA", "LabZoneB"}), ValidationError);
}

TEST_CASE("stratified quotas") {
    CHECK(stratified_quotas(std::vector<std::size_t>{900, 100}, 100) == std::vector<std::size_t>{90, 10});
    // 12 equal classes, 5000 rows: 5000 = 12 * 416 + 8, remainders tie, earliest eight get the extra row.
    const std::vector<std::size_t> equal(12, 1000);
    std::vector<std::size_t> expected(12, 416);
    std::fill(expected.begin(), expected.begin() + 8, 417);
    CHECK(stratified_quotas(equal, 5000) == expected);
    CHECK(stratified_quotas(std::vector<std::size_t>{3, 5}, 8) == std::vector<std::size_t>{3, 5});
    CHECK(stratified_quotas(std::vector<std::size_t>{3, 5}, 0) == std::vector<std::size_t>{0, 0});
    CHECK_THROWS_WITH_AS(stratified_quotas(std::vector<std::size_t>{3, 5}, 9),
                         doctest::Contains("target 9 exceeds dataset size 8"), ValidationError);
    CHECK_THROWS_AS(stratified_quotas(std::vector<std::size_t>{0, 0}, 0), ValidationError);
}

TEST_CASE("property: quotas sum to target, respect capacity and stay within one row of proportional") {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t k = 1 + gen() % 12;
        std::vector<std::size_t> counts(k);
        for (auto& c : counts) c = gen() % 4 == 0 ? gen() % 3 : 1 + gen() % 2000;
        const std::size_t n = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
        if (n == 0) continue;
        const std::size_t target = gen() % (n + 1);
        const auto q = stratified_quotas(counts, target);
        CHECK(std::accumulate(q.begin(), q.end(), std::size_t{0}) == target);
        bool capped = false;
        for (std::size_t i = 0; i < k; ++i) {
            CHECK(q[i] <= counts[i]);
            capped = capped || q[i] == counts[i];
        }
        // Without caps binding, each quota is floor or ceil of its exact share.
        if (!capped)
            for (std::size_t i = 0; i < k; ++i) {
                const double share = static_cast<double>(target) * static_cast<double>(counts[i]) / static_cast<double>(n);
                CHECK(std::abs(static_cast<double>(q[i]) - share) < 1.0);
            }
    }
}

TEST_CASE("stratified subsample") {
    const LabeledDataset ds = class_dataset({900, 100});
    const LabeledDataset sub = stratified_subsample(ds, 100, 42);
    CHECK(sub.size() == 100);
    CHECK(sub.class_counts() == std::vector<std::size_t>{90, 10});
    // Source order preserved and rows are distinct.
    CHECK(std::is_sorted(sub.timestamp_of_row.begin(), sub.timestamp_of_row.end()));
    CHECK(std::adjacent_find(sub.timestamp_of_row.begin(), sub.timestamp_of_row.end()) == sub.timestamp_of_row.end());
    CHECK(stratified_subsample(ds, 100, 42).timestamp_of_row == sub.timestamp_of_row);
    CHECK(stratified_subsample(ds, 100, 43).timestamp_of_row != sub.timestamp_of_row);

    const LabeledDataset all = stratified_subsample(ds, ds.size(), 5);
    CHECK(all.timestamp_of_row == ds.timestamp_of_row);
    CHECK(all.labels == ds.labels);

    CHECK_THROWS_AS(stratified_subsample(LabeledDataset{}, 0, 1), ValidationError);
    CHECK_THROWS_AS(stratified_subsample(ds, ds.size() + 1, 1), ValidationError);
}

TEST_CASE("subsample draws each class uniformly") {
    // Frequency of each source row across seeds should be close to quota / n_k.
    const LabeledDataset ds = class_dataset({40, 20});
    std::vector<int> hits(ds.size(), 0);
    const int trials = 4000;
    for (int s = 0; s < trials; ++s)
        for (std::uint64_t ts : stratified_subsample(ds, 15, static_cast<std::uint64_t>(s)).timestamp_of_row) ++hits[ts];
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const double p = ds.labels[i] == 0 ? 10.0 / 40.0 : 5.0 / 20.0;
        const double sd = std::sqrt(trials * p * (1 - p));
        CHECK(std::abs(hits[i] - trials * p) < 5 * sd);
    }
}

TEST_CASE("session split: ten equal sessions at 0.1 hold out exactly one") {
    const LabeledDataset ds = sessions_dataset(std::vector<std::size_t>(10, 30));
    const SplitPair sp = session_split(ds, 0.10, 42);
    CHECK(sp.test_sessions.size() == 1);
    CHECK(sp.train_sessions.size() == 9);
    CHECK(sp.test.size() == 30);
    CHECK(sp.train.size() == 270);
}

TEST_CASE("session split: two sessions at 0.5") {
    const LabeledDataset ds = sessions_dataset({20, 20});
    const SplitPair sp = session_split(ds, 0.5, 1);
    CHECK(sp.test_sessions.size() == 1);
    CHECK(sp.train_sessions.size() == 1);
    CHECK(sp.test.size() == 20);
}

TEST_CASE("session split: disjoint folds, deterministic, errors") {
    const LabeledDataset ds = sessions_dataset({13, 7, 22, 5, 30, 11, 9, 16, 4, 25, 18, 6});
    const SplitPair a = session_split(ds, 0.2, 9);
    const SplitPair b = session_split(ds, 0.2, 9);
    CHECK(a.test_sessions == b.test_sessions);
    CHECK(a.test.timestamp_of_row == b.test.timestamp_of_row);
    CHECK(a.train.size() + a.test.size() == ds.size());

    std::set<std::uint32_t> tr(a.train_sessions.begin(), a.train_sessions.end());
    for (auto s : a.test_sessions) CHECK(tr.count(s) == 0);
    std::set<std::string> tags(a.train.tag_of_row.begin(), a.train.tag_of_row.end());
    for (const auto& t : a.test.tag_of_row) CHECK(tags.count(t) == 0);
    for (auto s : a.test.session_of_row) CHECK(tr.count(s) == 0);
    CHECK(static_cast<double>(a.test.size()) >= 0.2 * static_cast<double>(ds.size()) - 1e-9);

    CHECK_THROWS_AS(session_split(sessions_dataset({10}), 0.1, 1), ValidationError);
    CHECK_THROWS_AS(session_split(ds, 0.0, 1), ValidationError);
    CHECK_THROWS_AS(session_split(ds, 1.0, 1), ValidationError);
}

TEST_CASE("session split repairs tags shared across sessions") {
    // Tag X appears in sessions 0 and 1; they must land on the same side, and a
    // repair that empties the test fold is an error.
    LabeledDataset ds = sessions_dataset({10, 10, 10, 10, 10});
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (ds.session_of_row[i] <= 1 && i % 10 == 0) ds.tag_of_row[i] = "X";
    int ok = 0, emptied = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        try {
            const SplitPair sp = session_split(ds, 0.3, seed);
            std::set<std::string> tags(sp.train.tag_of_row.begin(), sp.train.tag_of_row.end());
            for (const auto& t : sp.test.tag_of_row) CHECK(tags.count(t) == 0);
            const bool s0 = std::count(sp.test_sessions.begin(), sp.test_sessions.end(), 0u) > 0;
            const bool s1 = std::count(sp.test_sessions.begin(), sp.test_sessions.end(), 1u) > 0;
            CHECK(s0 == s1);
            ++ok;
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("empty fold") != std::string::npos);
            ++emptied;
        }
    }
    CHECK(ok == 40);
    CHECK(emptied == 0);

    // With only two linked sessions, repair always empties the test fold.
    LabeledDataset pair = sessions_dataset({10, 10});
    pair.tag_of_row[0] = pair.tag_of_row[10] = "X";
    CHECK_THROWS_WITH_AS(session_split(pair, 0.5, 3), doctest::Contains("empty fold"), ValidationError);
}

TEST_CASE("csv round trip") {
    const std::string text =
        "ReaderIP,Antenna,RSSI,TagId,ContainerId,SessionId,Timestamp\n"
        "192.168.1.10,1,-50.25,T1,C1,0,7\n"
        ",2,-60.00,T2,C2,1,8\n"
        "192.168.1.11,,,T3,,2,9\n";
    std::istringstream in(text);
    const auto raw_reads = read_reads_csv(in);
    REQUIRE(raw_reads.size() == 3);
    CHECK(*raw_reads[0].rssi == -50.25);
    CHECK_FALSE(raw_reads[1].reader_ip.has_value());
    CHECK_FALSE(raw_reads[2].antenna.has_value());
    CHECK_FALSE(raw_reads[2].container_id.has_value());
    CHECK(drop_nulls(raw_reads).size() == 1);

    std::istringstream bad_header("ReaderIP,Antenna,RSSI\n");
    CHECK_THROWS_AS(read_reads_csv(bad_header), ParseError);
    std::istringstream bad_row("ReaderIP,Antenna,RSSI,TagId,ContainerId,SessionId,Timestamp\n1.1.1.1,x,-5,T,C,0,0\n");
    CHECK_THROWS_AS(read_reads_csv(bad_row), ParseError);
    std::istringstream short_row("ReaderIP,Antenna,RSSI,TagId,ContainerId,SessionId,Timestamp\n1.1.1.1,1,-5\n");
    CHECK_THROWS_AS(read_reads_csv(short_row), ParseError);

    const LabeledDataset ds = sessions_dataset({3, 2});
    std::ostringstream out;
    write_labeled_csv(out, ds);
    std::istringstream back(out.str());
    const auto reparsed = read_reads_csv(back);
    const LabeledDataset again = label_from_zone_column(reparsed, ds.classes);
    CHECK(again.labels == ds.labels);
    CHECK(again.rows == ds.rows);
    CHECK(again.session_of_row == ds.session_of_row);
    CHECK(again.tag_of_row == ds.tag_of_row);
}
