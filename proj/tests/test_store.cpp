#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <random>

#include "netsense/store.hpp"
#include "netsense/tmx.hpp"
#include "test_util.hpp"

using namespace netsense;

namespace {

TrafficMatrix random_matrix(std::mt19937& gen, std::uint64_t window) {
    std::uniform_int_distribution<std::size_t> nnz_dist(0, 40);
    std::uniform_int_distribution<std::uint32_t> coord(0, 300);
    std::uniform_int_distribution<std::uint64_t> count(1, 1 << 20);

    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> cells;
    const std::size_t n = nnz_dist(gen);
    while (cells.size() < n) {
        cells[{coord(gen), coord(gen)}] = count(gen);
    }
    std::vector<Entry> entries;
    for (const auto& [rc, c] : cells) {
        entries.push_back(Entry{rc.first, rc.second, c});
    }
    return TrafficMatrix::from_entries(window, std::move(entries));
}

}  // namespace

TEST_CASE("tmx header arithmetic") {
    const TrafficMatrix empty = TrafficMatrix::from_entries(7, {});
    const auto bytes = tmx::write_matrix(empty);
    CHECK(bytes.size() == 32);
    CHECK(bytes[0] == 'T');
    CHECK(bytes[1] == 'M');
    CHECK(bytes[2] == 'X');
    CHECK(bytes[3] == '1');

    const TrafficMatrix one = TrafficMatrix::from_entries(0, {{1, 2, 3}});
    const auto one_bytes = tmx::write_matrix(one);
    CHECK(one_bytes.size() == 48);

    // Frozen image: header fields then the little-endian triple.
    const std::vector<std::uint8_t> want = {
        'T', 'M', 'X', '1', 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0,
        0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0,
        1, 0, 0, 0, 2, 0, 0, 0, 3, 0, 0, 0, 0, 0, 0, 0,
    };
    CHECK(one_bytes == want);
}

TEST_CASE("tmx round trip on randomized matrices") {
    std::mt19937 gen(2024);
    for (int i = 0; i < 300; ++i) {
        const TrafficMatrix m = random_matrix(gen, static_cast<std::uint64_t>(i));
        const auto bytes = tmx::write_matrix(m);
        const TrafficMatrix back = tmx::read_matrix(bytes);
        CHECK(back == m);
        // write∘read is the identity on valid images
        CHECK(tmx::write_matrix(back) == bytes);
    }
    // aggregate sentinel survives
    const TrafficMatrix agg =
        TrafficMatrix::from_entries(TrafficMatrix::kAggregateWindow, {{5, 6, 7}});
    CHECK(tmx::read_matrix(tmx::write_matrix(agg)).is_aggregate());
}

TEST_CASE("tmx rejects malformed input") {
    const TrafficMatrix m = TrafficMatrix::from_entries(0, {{1, 2, 3}, {1, 3, 4}});
    auto bytes = tmx::write_matrix(m);

    SUBCASE("bad magic") {
        bytes[0] = 'X';
        CHECK_THROWS_AS(tmx::read_matrix(bytes), tmx::BadMagic);
    }
    SUBCASE("unsupported version") {
        bytes[4] = 9;
        CHECK_THROWS_AS(tmx::read_matrix(bytes), tmx::UnsupportedVersion);
    }
    SUBCASE("nonzero flags") {
        bytes[8] = 1;
        CHECK_THROWS_AS(tmx::read_matrix(bytes), tmx::Malformed);
    }
    SUBCASE("nnz larger than payload") {
        bytes[24] = 3;
        CHECK_THROWS_AS(tmx::read_matrix(bytes), tmx::Malformed);
    }
    SUBCASE("trailing bytes") {
        bytes.push_back(0);
        CHECK_THROWS_AS(tmx::read_matrix(bytes), tmx::Malformed);
    }
    SUBCASE("short header") {
        bytes.resize(16);
        CHECK_THROWS_AS(tmx::read_matrix(bytes), tmx::Malformed);
    }
    SUBCASE("unsorted entries") {
        std::swap(bytes[32 + 4], bytes[48 + 4]);  // swap the two col fields
        CHECK_THROWS_AS(tmx::read_matrix(bytes), tmx::Malformed);
    }
    SUBCASE("zero count") {
        bytes[32 + 8] = 0;
        CHECK_THROWS_AS(tmx::read_matrix(bytes), tmx::Malformed);
    }
}

TEST_CASE("member and archive naming") {
    CHECK(tmx::member_name(0) == "tm_00000000.tmx");
    CHECK(tmx::member_name(123) == "tm_00000123.tmx");
    CHECK(tar_name(0, 63) == "tm_0_63.tar");
}

TEST_CASE("write_group layout arithmetic") {
    testutil::TempDir tmp("group");
    std::mt19937 gen(5);

    SUBCASE("five matrices at two per tar") {
        std::vector<TrafficMatrix> ms;
        for (std::uint64_t w = 0; w < 5; ++w) {
            ms.push_back(random_matrix(gen, w));
        }
        const auto paths = write_group(ms, StoreLayout{2, tmp.path()});
        REQUIRE(paths.size() == 3);
        CHECK(paths[0].filename() == "tm_0_1.tar");
        CHECK(paths[1].filename() == "tm_2_3.tar");
        CHECK(paths[2].filename() == "tm_4_4.tar");

        TarReader r(paths[2]);
        auto e = r.next_entry();
        REQUIRE(e.has_value());
        CHECK(e->name == "tm_00000004.tmx");
        CHECK_FALSE(r.next_entry().has_value());
    }

    SUBCASE("single matrix") {
        const std::vector<TrafficMatrix> ms{random_matrix(gen, 9)};
        const auto paths = write_group(ms, StoreLayout{64, tmp.path()});
        REQUIRE(paths.size() == 1);
        CHECK(paths[0].filename() == "tm_9_9.tar");
    }

    SUBCASE("empty input is an error") {
        CHECK_THROWS_AS(write_group({}, StoreLayout{2, tmp.path()}), StoreError);
    }
}

TEST_CASE("group round trip, determinism, and ordering") {
    testutil::TempDir tmp("roundtrip");
    std::mt19937 gen(17);
    std::vector<TrafficMatrix> ms;
    for (std::uint64_t w = 0; w < 130; ++w) {
        ms.push_back(random_matrix(gen, w));
    }

    const StoreLayout layout{64, tmp.path() / "a"};
    const auto paths = write_group(ms, layout);
    REQUIRE(paths.size() == 3);

    SUBCASE("read back in order") {
        const auto back = read_group(paths);
        CHECK(back == ms);
    }

    SUBCASE("byte-identical on rewrite") {
        const auto paths2 = write_group(ms, StoreLayout{64, tmp.path() / "b"});
        REQUIRE(paths2.size() == paths.size());
        for (std::size_t i = 0; i < paths.size(); ++i) {
            CHECK(testutil::read_file(paths[i]) == testutil::read_file(paths2[i]));
        }
    }

    SUBCASE("archives given out of order still yield window order") {
        std::vector<std::filesystem::path> shuffled(paths.rbegin(), paths.rend());
        const auto back = read_group(shuffled);
        CHECK(back == ms);
    }

    SUBCASE("non-contiguous windows warn but do not fail") {
        std::vector<TrafficMatrix> gappy{random_matrix(gen, 0), random_matrix(gen, 2)};
        const auto gap_paths = write_group(gappy, StoreLayout{64, tmp.path() / "gap"});
        std::vector<std::string> warnings;
        const auto back =
            read_group(gap_paths, [&](const std::string& w) { warnings.push_back(w); });
        CHECK(back.size() == 2);
        CHECK(warnings.size() == 1);
    }
}

TEST_CASE("corrupted member is reported by name after prior members") {
    testutil::TempDir tmp("fault");
    std::mt19937 gen(23);
    std::vector<TrafficMatrix> ms;
    for (std::uint64_t w = 0; w < 64; ++w) {
        ms.push_back(random_matrix(gen, w));
        if (ms.back().nnz() == 0) {  // keep member payloads non-trivial
            ms.back() = TrafficMatrix::from_entries(w, {{1, 1, 1}});
        }
    }
    const auto paths = write_group(ms, StoreLayout{64, tmp.path()});
    REQUIRE(paths.size() == 1);

    // Flip the first byte of member 40's TMX magic. Data offsets: each member
    // occupies a 512-byte header plus its padded payload.
    auto bytes = testutil::read_file(paths[0]);
    std::uint64_t offset = 0;
    for (std::uint64_t w = 0; w < 40; ++w) {
        const std::uint64_t payload = 32 + 16 * ms[w].nnz();
        offset += 512 + (payload + 511) / 512 * 512;
    }
    offset += 512;  // member 40's own header
    bytes[offset] ^= 0xff;
    testutil::write_file(paths[0], bytes);

    GroupReader reader({paths[0]});
    std::size_t yielded = 0;
    try {
        while (auto m = reader.next()) {
            CHECK(*m == ms[yielded]);
            yielded++;
        }
        FAIL("expected a StoreError");
    } catch (const StoreError& e) {
        CHECK(yielded == 40);
        CHECK(std::string(e.what()).find("tm_00000040.tmx") != std::string::npos);
    }
}

TEST_CASE("tar checksum failures are detected") {
    testutil::TempDir tmp("tarsum");
    const auto path = tmp.path() / "x.tar";
    {
        TarWriter w(path);
        const std::vector<std::uint8_t> data{1, 2, 3};
        w.add_file("member", data);
        w.close();
    }
    auto bytes = testutil::read_file(path);
    bytes[0] ^= 0x01;  // corrupt the name field
    testutil::write_file(path, bytes);

    TarReader r(path);
    CHECK_THROWS_AS(r.next_entry(), TarError);
}

TEST_CASE("system tar can list our archives") {
    if (std::system("tar --version >/dev/null 2>&1") != 0) {
        MESSAGE("system tar unavailable, skipping interoperability check");
        return;
    }
    testutil::TempDir tmp("interop");
    std::vector<TrafficMatrix> ms{TrafficMatrix::from_entries(0, {{1, 2, 3}}),
                                  TrafficMatrix::from_entries(1, {{4, 5, 6}})};
    const auto paths = write_group(ms, StoreLayout{64, tmp.path()});
    const std::string cmd = "tar -tf " + paths[0].string() + " > " +
                            (tmp.path() / "listing.txt").string() + " 2>/dev/null";
    REQUIRE(std::system(cmd.c_str()) == 0);
    std::ifstream listing(tmp.path() / "listing.txt");
    std::string a, b;
    listing >> a >> b;
    CHECK(a == "tm_00000000.tmx");
    CHECK(b == "tm_00000001.tmx");
}
