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

// Command-line front end. `cli_main` is the whole program so tests can
// drive it in-process with captured streams.
//
// Subcommands: keygen, certgen, run, demo, inspect.
// Exit codes: 0 success, 1 protocol rejection outcome, 2 usage error.

#pragma once

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "paysec/blindsig.hpp"
#include "paysec/scenario.hpp"

namespace paysec::cli {

constexpr unsigned kDefaultKeyBits = 2048;
constexpr unsigned kMinKeyBits = 256;

inline int cmd_keygen(unsigned bits, std::uint64_t seed, const std::string& out_path,
                      std::ostream& out, std::ostream& err) {
    crypto::RsaKeyPair kp = crypto::generate_keypair(bits, seed);
    if (out_path.empty()) {
        crypto::save_keypair(out, kp);
        return 0;
    }
    try {
        crypto::save_keypair_file(out_path, kp);
    } catch (const Error& e) {
        err << "keygen: " << e.what() << "\n";
        return 2;
    }
    out << "wrote " << out_path << " (" << bits << " bits)\n";
    return 0;
}

inline int cmd_certgen(const std::string& ca_key_path, const std::string& ca_id,
                       const std::string& subject_key_path, const std::string& subject_id,
                       const std::string& out_path, std::ostream& out, std::ostream& err) {
    try {
        crypto::RsaKeyPair ca = crypto::load_keypair_file(ca_key_path);
        if (!ca.has_private()) throw ParseError("CA key file has no private exponent");
        crypto::RsaKeyPair subject = crypto::load_keypair_file(subject_key_path);
        crypto::Certificate cert =
            crypto::ca_issue(ca, ca_id, subject_id, subject.public_key());
        if (out_path.empty()) {
            crypto::save_certificate(out, cert);
        } else {
            crypto::save_certificate_file(out_path, cert);
            out << "wrote " << out_path << " (subject " << subject_id << ")\n";
        }
    } catch (const Error& e) {
        err << "certgen: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

namespace detail {

// Default transcript path: scenario basename with a .transcript suffix,
// in the working directory.
inline std::string default_transcript_path(const std::string& scenario_path) {
    std::size_t slash = scenario_path.find_last_of('/');
    std::string base =
        slash == std::string::npos ? scenario_path : scenario_path.substr(slash + 1);
    std::size_t dot = base.find_last_of('.');
    if (dot != std::string::npos && dot > 0) base = base.substr(0, dot);
    return base + ".transcript";
}

} // namespace detail

inline int cmd_run(const std::string& scenario_path, std::optional<std::uint64_t> seed,
                   std::string out_path, bool verbose, std::ostream& out,
                   std::ostream& err) {
    scenario::ScenarioSpec spec;
    try {
        spec = scenario::load_scenario(scenario_path);
    } catch (const Error& e) {
        err << "run: " << e.what() << "\n";
        return 2;
    }
    if (seed) spec.seed = *seed;

    scenario::RunResult result;
    try {
        result = scenario::run_scenario(spec);
    } catch (const NonTermination& e) {
        err << "run: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        err << "run: " << e.what() << "\n";
        return 2;
    }

    if (out_path.empty()) out_path = detail::default_transcript_path(scenario_path);
    std::ofstream file(out_path, std::ios::binary);
    if (!file) {
        err << "run: cannot write transcript file: " << out_path << "\n";
        return 2;
    }
    file << result.transcript_text();
    file.close();

    if (verbose)
        for (const auto& line : result.transcript) out << line << "\n";
    out << result.summary << " seed=" << spec.seed << " transcript=" << out_path
        << "\n";
    return result.rejects > 0 ? 1 : 0;
}

// ---------------------------------------------------------------------------
// Demos: canonical happy path plus one attack variant per protocol, with
// a short narration. Always exits 0; the attack's rejection line is
// printed as part of the show.

namespace detail {

inline const char* demo_text(const std::string& protocol, bool attack) {
    if (protocol == "mix") {
        if (!attack)
            return R"([scenario]
name = demo-mix
protocol = mix
seed = 90001

[actor alice]
role = customer
path = m0,m1,m2
payload = dear-bob-hello

[actor bob]
role = customer

[actor m0]
role = mix

[actor m1]
role = mix

[actor m2]
role = mix

[schedule]
1 alice bob packet
)";
        return R"([scenario]
name = demo-mix-replay
protocol = mix
seed = 90001

[actor alice]
role = customer
path = m0,m1,m2
payload = dear-bob-hello

[actor bob]
role = customer

[actor m0]
role = mix

[actor m1]
role = mix

[actor m2]
role = mix

[tap]
from = alice
to = m0
action = replay
ref = block
at = 4

[schedule]
1 alice bob packet
)";
    }
    if (protocol == "blindsig") {
        if (!attack)
            return R"([scenario]
name = demo-blindsig
protocol = blindsig
seed = 90002

[actor payer]
role = customer
coins = 10
denom = 10

[actor bank]
role = provider

[schedule]
1 payer bank withdraw
)";
        return R"([scenario]
name = demo-blindsig-cheat
protocol = blindsig
seed = 90002

[actor payer]
role = customer
coins = 10
denom = 10
cheat = 1

[actor bank]
role = provider

[schedule]
1 payer bank withdraw
)";
    }
    if (protocol == "dualsig") {
        if (!attack)
            return R"([scenario]
name = demo-dualsig
protocol = dualsig
seed = 90003

[actor buyer]
role = customer
pan = 4716382920184471
amount = 4999
desc = camera kit

[actor shop]
role = merchant

[actor gw]
role = gateway
limit = 500000

[schedule]
1 buyer shop purchase
)";
        return R"([scenario]
name = demo-dualsig-tamper
protocol = dualsig
seed = 90003

[actor buyer]
role = customer
pan = 4716382920184471
amount = 4999
desc = camera kit

[actor shop]
role = merchant

[actor gw]
role = gateway
limit = 500000

[tap]
from = buyer
to = shop
action = tamper
byte = 8

[schedule]
1 buyer shop purchase
)";
    }
    if (protocol == "onekp") {
        if (!attack)
            return R"([scenario]
name = demo-onekp
protocol = onekp
seed = 90004

[actor buyer]
role = customer
pan = 4556737586899855
price = 7250
desc = flowers

[actor shop]
role = merchant
price = 7250
desc = flowers

[actor acq]
role = acquirer
limit = 100000

[schedule]
1 buyer shop initiate
)";
        return R"([scenario]
name = demo-onekp-replay
protocol = onekp
seed = 90004

[actor buyer]
role = customer
pan = 4556737586899855
price = 7250
desc = flowers

[actor shop]
role = merchant
price = 7250
desc = flowers

[actor acq]
role = acquirer
limit = 100000

[tap]
from = buyer
to = shop
action = replay
ref = payment
at = 5

[schedule]
1 buyer shop initiate
)";
    }
    if (protocol == "fv") {
        if (!attack)
            return R"([scenario]
name = demo-fv
protocol = fv
seed = 90005

[actor buyer]
role = customer
balance = 50000
amount = 1200
answer = yes

[actor shop]
role = merchant

[actor fv]
role = provider

[schedule]
1 buyer shop order
)";
        return R"([scenario]
name = demo-fv-fraud
protocol = fv
seed = 90005

[actor buyer]
role = customer
balance = 50000
amount = 1200
answer = fraud

[actor shop]
role = merchant

[actor fv]
role = provider

[schedule]
1 buyer shop order
)";
    }
    return nullptr;
}

inline const char* demo_blurb(const std::string& protocol, bool attack) {
    if (protocol == "mix")
        return attack ? "a captured block is re-injected; the first mix drops the duplicate"
                      : "a payload crosses three mixes, each peeling one layer";
    if (protocol == "blindsig")
        return attack ? "one revealed candidate is malformed; the signer aborts"
                      : "the bank signs a coin it never sees";
    if (protocol == "dualsig")
        return attack ? "one order byte is flipped in flight; the dual signature breaks"
                      : "merchant sees the order, gateway sees the card, one signature";
    if (protocol == "onekp")
        return attack ? "the payment message is replayed; the acquirer's cache rejects it"
                      : "three parties agree on one transaction fingerprint";
    if (protocol == "fv")
        return attack ? "the customer reports fraud; the pseudonym is revoked for good"
                      : "goods move first, money only after the customer says yes";
    return "";
}

inline void demo_direct_checks(const std::string& protocol, std::ostream& out) {
    if (protocol == "blindsig") {
        // The unblinded signature must equal a direct signature on the
        // same message.
        crypto::RsaKeyPair keys = crypto::generate_keypair(512, 90102);
        Rng rng(90103);
        Bytes message = Encoder().str("coin").i64(10).bytes(rng.bytes(16)).take();
        blindsig::BlindingSession s = blindsig::blind(message, keys.public_key(), rng);
        s.blind_sig = blindsig::sign_blinded(keys, s.blinded);
        BigInt unblinded = blindsig::unblind(s);
        BigInt direct = crypto::sign(keys, message);
        out << "check unblinded-equals-direct: "
            << (unblinded == direct ? "ok" : "MISMATCH") << "\n";
    } else if (protocol == "dualsig") {
        // Swapping in a different order behind the same dual signature
        // must fail the merchant check.
        crypto::RsaKeyPair customer = crypto::generate_keypair(512, 90104);
        crypto::RsaKeyPair gateway = crypto::generate_keypair(512, 90105);
        Rng rng(90106);
        setcore::PaymentInstruction pi = setcore::make_payment_instruction(
            "4716382920184471", "09-2028", rng.bytes(setcore::kPanSecretLen), 4999, rng);
        setcore::OrderInformation oi{Bytes{'c', 'a', 'm', 'e', 'r', 'a'}, 4999, "shop"};
        setcore::DualSignedRequest req = setcore::build_request(
            customer, gateway.public_key(), "gw", pi, oi, rng);
        out << "check honest order accepted: "
            << (setcore::merchant_verify(req, customer.public_key()) ? "ok" : "MISMATCH")
            << "\n";
        req.oi.price = 1;
        out << "check substituted order rejected: "
            << (setcore::merchant_verify(req, customer.public_key()) ? "MISSED" : "ok")
            << "\n";
    }
}

} // namespace detail

inline int cmd_demo(const std::string& protocol, std::optional<std::uint64_t> seed,
                    std::ostream& out, std::ostream& err) {
    const char* happy = detail::demo_text(protocol, false);
    const char* attack = detail::demo_text(protocol, true);
    if (!happy) {
        err << "demo: unknown protocol: " << protocol
            << " (expected mix|blindsig|dualsig|onekp|fv)\n";
        return 2;
    }

    detail::demo_direct_checks(protocol, out);
    for (bool variant : {false, true}) {
        scenario::ScenarioSpec spec =
            scenario::parse_scenario(variant ? attack : happy);
        if (seed) spec.seed = *seed;
        scenario::RunResult r = scenario::run_scenario(spec);
        out << "== " << protocol << (variant ? " attack: " : " happy path: ")
            << detail::demo_blurb(protocol, variant) << " ==\n";
        for (const auto& line : r.transcript) out << line << "\n";
        out << r.summary << "\n";
        if (variant) {
            for (const auto& line : r.transcript)
                if (scenario::detail::is_reject_line(line)) {
                    out << "rejection: " << line << "\n";
                    break;
                }
        }
    }
    return 0;
}

inline int cmd_inspect(const std::string& path, bool verbose, std::ostream& out,
                       std::ostream& err) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        err << "inspect: cannot open: " << path << "\n";
        return 2;
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);

    std::size_t links = 0, decisions = 0, errors = 0, accounts = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string& l = lines[i];
        // Every record carries at least one key=value token.
        bool has_kv = false;
        std::istringstream ts(l);
        std::string token;
        while (ts >> token) {
            std::size_t eq = token.find('=');
            if (eq != std::string::npos && eq > 0) has_kv = true;
        }
        if (l.empty() || !has_kv) {
            err << "inspect: line " << (i + 1) << " is not a transcript record\n";
            return 2;
        }
        if (l.find(" link=") != std::string::npos) ++links;
        if (l.find(" error=") != std::string::npos) ++errors;
        if (l.find("decision=") != std::string::npos ||
            l.find("auth=") != std::string::npos ||
            l.find("gateway=") != std::string::npos)
            ++decisions;
        if (l.rfind("account=", 0) == 0) ++accounts;
    }

    // Lossless re-emission: output equals the input file.
    for (const auto& l : lines) out << l << "\n";
    if (verbose)
        err << "inspect: lines=" << lines.size() << " links=" << links
            << " decisions=" << decisions << " errors=" << errors
            << " accounts=" << accounts << "\n";
    return 0;
}

inline int cli_main(const std::vector<std::string>& args, std::ostream& out,
                    std::ostream& err) {
    CLI::App app{"paysec: e-payment protocol toolkit"};
    app.require_subcommand(1);

    unsigned bits = kDefaultKeyBits;
    std::uint64_t keygen_seed = 1;
    std::string keygen_out;
    CLI::App* keygen = app.add_subcommand("keygen", "generate an RSA key file");
    keygen->add_option("--bits", bits, "modulus size")
        ->check(CLI::Range(kMinKeyBits, 8192u));
    keygen->add_option("--seed", keygen_seed, "deterministic seed");
    keygen->add_option("--out", keygen_out, "key file path (default: stdout)");

    std::string ca_key, ca_id = "ca", subject_key, subject_id, cert_out;
    CLI::App* certgen = app.add_subcommand("certgen", "issue a certificate");
    certgen->add_option("--ca-key", ca_key, "CA private key file")->required();
    certgen->add_option("--ca-id", ca_id, "CA identity");
    certgen->add_option("--subject-key", subject_key, "subject key file")->required();
    certgen->add_option("--subject", subject_id, "subject identity")->required();
    certgen->add_option("--out", cert_out, "certificate path (default: stdout)");

    std::string scenario_path, run_out;
    std::optional<std::uint64_t> run_seed;
    bool run_verbose = false;
    CLI::App* run = app.add_subcommand("run", "execute a scenario file");
    run->add_option("--scenario", scenario_path, "scenario file")->required();
    run->add_option("--seed", run_seed, "override the scenario seed");
    run->add_option("--out", run_out, "transcript file path");
    run->add_flag("-v,--verbose", run_verbose, "echo the transcript");

    std::string demo_protocol;
    std::optional<std::uint64_t> demo_seed;
    CLI::App* demo = app.add_subcommand("demo", "run a protocol demonstration");
    demo->add_option("protocol", demo_protocol, "mix|blindsig|dualsig|onekp|fv")
        ->required();
    demo->add_option("--seed", demo_seed, "override the demo seed");

    std::string inspect_path;
    bool inspect_verbose = false;
    CLI::App* inspect = app.add_subcommand("inspect", "validate and re-emit a transcript");
    inspect->add_option("path", inspect_path, "transcript file")->required();
    inspect->add_flag("-v,--verbose", inspect_verbose, "print record statistics");

    std::vector<const char*> argv;
    argv.push_back("paysec");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << "usage error: " << e.what() << "\n";
        return 2;
    }

    if (keygen->parsed()) return cmd_keygen(bits, keygen_seed, keygen_out, out, err);
    if (certgen->parsed())
        return cmd_certgen(ca_key, ca_id, subject_key, subject_id, cert_out, out, err);
    if (run->parsed())
        return cmd_run(scenario_path, run_seed, run_out, run_verbose, out, err);
    if (demo->parsed()) return cmd_demo(demo_protocol, demo_seed, out, err);
    if (inspect->parsed()) return cmd_inspect(inspect_path, inspect_verbose, out, err);
    err << "usage error: no subcommand\n";
    return 2;
}

} // namespace paysec::cli
