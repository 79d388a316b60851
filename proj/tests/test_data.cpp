#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "octens/data.hpp"
#include "octens/error.hpp"

using namespace octens;

namespace {

const std::string kHeader = "sample_id,IRHRF,PAVF,FAVF,IRF,DRT_ME,VD\n";

ErrorKind kind_of(const auto& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::Parameter;
}

std::string message_of(const auto& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("score files round trip with six decimals") {
    const ScoreMatrix m = parse_scores(kHeader + "a,0.1,0.2,0.3,0.4,0.5,1\nb,0,0.25,0.125,0.0625,0.999999,0.5\n");
    REQUIRE(m.rows() == 2);
    CHECK(m.row(1)[2] == 0.125);
    const std::string text = format_scores(m);
    CHECK(text == kHeader + "a,0.100000,0.200000,0.300000,0.400000,0.500000,1.000000\n"
                            "b,0.000000,0.250000,0.125000,0.062500,0.999999,0.500000\n");
    CHECK(parse_scores(text) == m);
}

TEST_CASE("label files") {
    const LabelMatrix m = parse_labels(kHeader + "x,1,0,0,1,1,0\r\ny,0,0,0,0,0,1\r\n");
    REQUIRE(m.rows() == 2);
    CHECK(m.row(0)[3] == 1);
    CHECK(format_labels(m) == kHeader + "x,1,0,0,1,1,0\ny,0,0,0,0,0,1\n");
}

TEST_CASE("malformed files name the line and column") {
    CHECK(kind_of([] { parse_scores("id,a\n"); }) == ErrorKind::Format);
    const auto msg = message_of([] { parse_scores(kHeader + "a,0.1,0.2,0.3,0.4,0.5,0.6\nb,0.1,0.2,1.5,0.4,0.5,0.6\n", "f.csv"); });
    CHECK(msg.find("f.csv:3") != std::string::npos);
    CHECK(msg.find("FAVF") != std::string::npos);
    CHECK(kind_of([] { parse_scores(kHeader + "a,0.1,0.2\n"); }) == ErrorKind::Format);
    CHECK(kind_of([] { parse_scores(kHeader + "a,0.1,0.2,x,0.4,0.5,0.6\n"); }) == ErrorKind::Format);
    CHECK(kind_of([] { parse_scores(kHeader + "a,0,0,0,0,0,0\na,0,0,0,0,0,0\n"); }) == ErrorKind::Format);
    CHECK(kind_of([] { parse_labels(kHeader + "a,0,2,0,0,0,0\n"); }) == ErrorKind::Format);
    CHECK(kind_of([] { parse_labels(kHeader + "a,0,0.5,0,0,0,0\n"); }) == ErrorKind::Format);
    CHECK(kind_of([] { read_scores("/nonexistent/scores.csv"); }) == ErrorKind::Io);
    CHECK(kind_of([] { parse_manifest("sample_id,eye_id\na,e1,extra\n"); }) == ErrorKind::Format);
}

TEST_CASE("align keeps the sorted intersection and reports the rest") {
    const ScoreMatrix a = parse_scores(kHeader + "c,0,0,0,0,0,0.3\na,0,0,0,0,0,0.1\nb,0,0,0,0,0,0.2\n");
    const LabelMatrix b = parse_labels(kHeader + "d,0,0,0,0,0,1\nb,0,0,0,0,0,1\nc,0,0,0,0,0,0\n");
    const auto r = align(a, b);
    CHECK(r.first.sample_ids() == std::vector<std::string>{"b", "c"});
    CHECK(r.second.sample_ids() == std::vector<std::string>{"b", "c"});
    CHECK(r.first.row(1)[5] == 0.3);
    CHECK(r.second.row(1)[5] == 0);
    CHECK(r.dropped == std::vector<std::string>{"a", "d"});
    const LabelMatrix none = parse_labels(kHeader + "z,0,0,0,0,0,0\n");
    CHECK(kind_of([&] { align(a, none); }) == ErrorKind::Parameter);
}

TEST_CASE("eye-wise split keeps eyes whole and hits the target fraction") {
    std::mt19937_64 gen(2024);
    for (int trial = 0; trial < 300; ++trial) {
        const int eyes = 2 + static_cast<int>(gen() % 30);
        std::vector<ManifestEntry> entries;
        std::map<std::string, int> size;
        int sid = 0;
        for (int e = 0; e < eyes; ++e) {
            const int n = 1 + static_cast<int>(gen() % 12);
            for (int i = 0; i < n; ++i) entries.push_back({"s" + std::to_string(sid++), "e" + std::to_string(e)});
            size["e" + std::to_string(e)] = n;
        }
        std::shuffle(entries.begin(), entries.end(), gen);
        const SampleManifest manifest(entries);
        const double frac = std::uniform_real_distribution<double>(0.05, 0.95)(gen);
        const auto split = eyewise_split(manifest, frac, gen());

        std::map<std::string, std::string> eye_of;
        for (const auto& e : entries) eye_of[e.sample_id] = e.eye_id;
        std::set<std::string> train_eyes, val_eyes;
        for (const auto& id : split.train_ids) train_eyes.insert(eye_of[id]);
        for (const auto& id : split.val_ids) val_eyes.insert(eye_of[id]);
        for (const auto& e : val_eyes) CHECK(train_eyes.count(e) == 0);
        CHECK(split.train_ids.size() + split.val_ids.size() == entries.size());
        CHECK_FALSE(split.train_ids.empty());

        int max_eye = 0;
        for (const auto& [e, n] : size) max_eye = std::max(max_eye, n);
        const double achieved = static_cast<double>(split.val_ids.size()) / static_cast<double>(entries.size());
        CHECK(std::abs(achieved - frac) <= static_cast<double>(max_eye) / static_cast<double>(entries.size()) + 1e-12);
    }
}

TEST_CASE("eye-wise split is deterministic, ordered and validated") {
    const SampleManifest m = parse_manifest("sample_id,eye_id\na,L1\nb,L1\nc,R1\nd,L2\ne,R2\nf,R2\n");
    const auto s1 = eyewise_split(m, 0.3, 17);
    const auto s2 = eyewise_split(m, 0.3, 17);
    CHECK(s1.train_ids == s2.train_ids);
    CHECK(s1.val_ids == s2.val_ids);
    CHECK(std::is_sorted(s1.train_ids.begin(), s1.train_ids.end()));  // manifest order here is sorted
    const std::string text = format_split(m, s1);
    CHECK(text.rfind("sample_id,split\na,", 0) == 0);
    CHECK(kind_of([&] { eyewise_split(m, 0.0, 1); }) == ErrorKind::Parameter);
    CHECK(kind_of([&] { eyewise_split(m, 1.0, 1); }) == ErrorKind::Parameter);
    const SampleManifest one_eye = parse_manifest("sample_id,eye_id\na,L\nb,L\n");
    CHECK(kind_of([&] { eyewise_split(one_eye, 0.5, 1); }) == ErrorKind::Parameter);
}
