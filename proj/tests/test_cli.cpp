// Copyright 2026 The paysec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "paysec/cli.hpp"
#include "test_util.hpp"

using namespace paysec;

namespace {

struct CliRun {
    int code = -1;
    std::string out;
    std::string err;
};

CliRun run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    CliRun r;
    r.code = cli::cli_main(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string scenario_path(const std::string& file) {
    return std::string(PAYSEC_SCENARIO_DIR) + "/" + file;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out << content;
}

struct TempFile {
    std::string path;
    explicit TempFile(std::string p) : path(std::move(p)) {}
    ~TempFile() { std::remove(path.c_str()); }
};

} // namespace

TEST_CASE("keygen writes a 2048-bit key by default", "[cli]") {
    CliRun r = run_cli({"keygen", "--seed", "42"});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    crypto::RsaKeyPair kp = crypto::load_keypair(in);
    REQUIRE(kp.bits == 2048);
    REQUIRE(kp.has_private());
    // Round trip through the signing path.
    Bytes msg{'k', 'e', 'y'};
    REQUIRE(crypto::verify(kp.public_key(), msg, crypto::sign(kp, msg)));
}

TEST_CASE("keygen is reproducible per seed", "[cli]") {
    CliRun a = run_cli({"keygen", "--bits", "512", "--seed", "7"});
    CliRun b = run_cli({"keygen", "--bits", "512", "--seed", "7"});
    CliRun c = run_cli({"keygen", "--bits", "512", "--seed", "8"});
    REQUIRE(a.code == 0);
    REQUIRE(a.out == b.out);
    REQUIRE(a.out != c.out);
}

TEST_CASE("keygen rejects toy moduli and unwritable paths", "[cli]") {
    CliRun r = run_cli({"keygen", "--bits", "32"});
    REQUIRE(r.code == 2);
    REQUIRE_FALSE(r.err.empty());

    CliRun w = run_cli({"keygen", "--bits", "512", "--seed", "1", "--out",
                        "/nonexistent-dir/key.txt"});
    REQUIRE(w.code == 2);
}

TEST_CASE("certgen issues a verifiable certificate from key files", "[cli]") {
    TempFile ca_file("cli_ca_key.tmp");
    TempFile subject_file("cli_subject_key.tmp");
    TempFile cert_file("cli_cert.tmp");
    REQUIRE(run_cli({"keygen", "--bits", "512", "--seed", "11", "--out", ca_file.path})
                .code == 0);
    REQUIRE(run_cli({"keygen", "--bits", "512", "--seed", "12", "--out",
                     subject_file.path})
                .code == 0);

    CliRun r = run_cli({"certgen", "--ca-key", ca_file.path, "--ca-id", "root",
                        "--subject-key", subject_file.path, "--subject", "acq-1",
                        "--out", cert_file.path});
    REQUIRE(r.code == 0);

    crypto::Certificate cert = crypto::load_certificate_file(cert_file.path);
    crypto::RsaKeyPair ca = crypto::load_keypair_file(ca_file.path);
    REQUIRE(cert.subject_id == "acq-1");
    REQUIRE(cert.issuer_id == "root");
    REQUIRE(crypto::ca_verify(ca.public_key(), cert));

    CliRun missing = run_cli({"certgen", "--subject", "x"});
    REQUIRE(missing.code == 2);
    CliRun bad = run_cli({"certgen", "--ca-key", "/nonexistent", "--subject-key",
                          subject_file.path, "--subject", "x"});
    REQUIRE(bad.code == 2);
}

TEST_CASE("run executes a shipped scenario and reports the outcome", "[cli]") {
    TempFile transcript("cli_onekp.transcript.tmp");
    CliRun r = run_cli({"run", "--scenario", scenario_path("onekp_honest.scn"), "--out",
                        transcript.path});
    REQUIRE(r.code == 0);
    REQUIRE(r.out.find("auth=yes") != std::string::npos);
    REQUIRE(r.out.find("transcript=" + transcript.path) != std::string::npos);

    std::string text = read_file(transcript.path);
    REQUIRE(text.find("decision=yes") != std::string::npos);
}

TEST_CASE("run exits 1 on protocol rejection outcomes", "[cli]") {
    TempFile t1("cli_fraud.transcript.tmp");
    CliRun fraud = run_cli({"run", "--scenario", scenario_path("fv_fraud.scn"), "--out",
                            t1.path});
    REQUIRE(fraud.code == 1);
    REQUIRE(fraud.out.find("vpin revoked") != std::string::npos);

    TempFile t2("cli_replay.transcript.tmp");
    CliRun replay = run_cli({"run", "--scenario", scenario_path("onekp_replay.scn"),
                             "--out", t2.path});
    REQUIRE(replay.code == 1);
    REQUIRE(read_file(t2.path).find("reject-replay") != std::string::npos);
}

TEST_CASE("run exits 2 on missing or malformed scenario files", "[cli]") {
    CliRun missing = run_cli({"run", "--scenario", "/nonexistent.scn"});
    REQUIRE(missing.code == 2);
    REQUIRE_FALSE(missing.err.empty());

    TempFile bad("cli_bad.scn.tmp");
    write_file(bad.path, "[scenario]\nname = broken\n");
    CliRun malformed = run_cli({"run", "--scenario", bad.path});
    REQUIRE(malformed.code == 2);
}

TEST_CASE("run with the same seed writes byte-identical transcripts", "[cli]") {
    TempFile a("cli_det_a.transcript.tmp");
    TempFile b("cli_det_b.transcript.tmp");
    CliRun ra = run_cli({"run", "--scenario", scenario_path("mix_traffic.scn"), "--out",
                         a.path});
    REQUIRE(ra.code == 0);
    REQUIRE(ra.out.find(" seed=1007 ") != std::string::npos);
    REQUIRE(run_cli({"run", "--scenario", scenario_path("mix_traffic.scn"), "--out",
                     b.path})
                .code == 0);
    REQUIRE(read_file(a.path) == read_file(b.path));

    TempFile c("cli_det_c.transcript.tmp");
    TempFile d("cli_det_d.transcript.tmp");
    CliRun rc = run_cli({"run", "--scenario", scenario_path("mix_traffic.scn"), "--seed",
                         "999", "--out", c.path});
    REQUIRE(rc.code == 0);
    REQUIRE(rc.out.find(" seed=999 ") != std::string::npos);
    REQUIRE(run_cli({"run", "--scenario", scenario_path("mix_traffic.scn"), "--seed",
                     "999", "--out", d.path})
                .code == 0);
    REQUIRE(read_file(c.path) == read_file(d.path));
}

TEST_CASE("every demo exits 0 and shows the attack rejection", "[cli]") {
    for (const char* protocol : {"mix", "blindsig", "dualsig", "onekp", "fv"}) {
        CliRun r = run_cli({"demo", protocol});
        INFO(protocol);
        REQUIRE(r.code == 0);
        REQUIRE(r.out.find("happy path") != std::string::npos);
        REQUIRE(r.out.find("attack") != std::string::npos);
        REQUIRE(r.out.find("rejection: ") != std::string::npos);
    }

    CliRun blind = run_cli({"demo", "blindsig"});
    REQUIRE(blind.out.find("check unblinded-equals-direct: ok") != std::string::npos);
    CliRun dual = run_cli({"demo", "dualsig"});
    REQUIRE(dual.out.find("check substituted order rejected: ok") != std::string::npos);
    CliRun mix = run_cli({"demo", "mix"});
    REQUIRE(mix.out.find("delivered=1") != std::string::npos);

    CliRun unknown = run_cli({"demo", "tls"});
    REQUIRE(unknown.code == 2);
}

TEST_CASE("inspect round-trips a transcript without loss", "[cli]") {
    TempFile transcript("cli_inspect.transcript.tmp");
    REQUIRE(run_cli({"run", "--scenario", scenario_path("fv_honest.scn"), "--out",
                     transcript.path})
                .code == 0);

    CliRun r = run_cli({"inspect", transcript.path});
    REQUIRE(r.code == 0);
    REQUIRE(r.out == read_file(transcript.path));

    CliRun v = run_cli({"inspect", transcript.path, "-v"});
    REQUIRE(v.code == 0);
    REQUIRE(v.err.find("lines=") != std::string::npos);

    TempFile junk("cli_junk.transcript.tmp");
    write_file(junk.path, "this line has no records\n");
    REQUIRE(run_cli({"inspect", junk.path}).code == 2);
    REQUIRE(run_cli({"inspect", "/nonexistent.transcript"}).code == 2);
}

TEST_CASE("usage errors exit 2 and help exits 0", "[cli]") {
    REQUIRE(run_cli({}).code == 2);
    REQUIRE(run_cli({"frobnicate"}).code == 2);
    REQUIRE(run_cli({"run"}).code == 2);                    // missing --scenario
    REQUIRE(run_cli({"run", "--bogus-flag", "x"}).code == 2);
    CliRun help = run_cli({"--help"});
    REQUIRE(help.code == 0);
    REQUIRE(help.out.find("keygen") != std::string::npos);
}
