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

#include <algorithm>
#include <string>

#include "paysec/scenario.hpp"
#include "paysec/simnet.hpp"
#include "test_util.hpp"

using namespace paysec;
using namespace paysec::simnet;

namespace {

std::size_t count_lines(const std::vector<std::string>& lines, const std::string& needle) {
    std::size_t n = 0;
    for (const auto& l : lines)
        if (l.find(needle) != std::string::npos) ++n;
    return n;
}

bool captures_contain(const std::vector<Bytes>& captures, const std::string& text) {
    Bytes pattern(text.begin(), text.end());
    for (const Bytes& c : captures)
        if (std::search(c.begin(), c.end(), pattern.begin(), pattern.end()) != c.end())
            return true;
    return false;
}

const char* kOnekpHonest = R"(# 1KP purchase, no adversary
[scenario]
name = onekp-honest
protocol = onekp
seed = 71001

[actor cust]
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
1 cust shop initiate
)";

const char* kFvHonest = R"([scenario]
name = fv-honest
protocol = fv
seed = 71002

[actor cust]
role = customer
balance = 50000
amount = 1200
answer = yes

[actor shop]
role = merchant

[actor fv]
role = provider

[schedule]
1 cust shop order
)";

const char* kMixRoute = R"([scenario]
name = mix-route
protocol = mix
seed = 71003

[actor alice]
role = customer
path = m0,m1
payload = from-alice

[actor bob]
role = customer

[actor m0]
role = mix

[actor m1]
role = mix

[schedule]
1 alice bob packet
)";

const char* kDualsigHonest = R"([scenario]
name = dualsig-honest
protocol = dualsig
seed = 71004

[actor cust]
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
1 cust shop purchase
)";

const char* kBlindsigHonest = R"([scenario]
name = blindsig-honest
protocol = blindsig
seed = 71005

[actor cust]
role = customer
coins = 10
denom = 10

[actor bank]
role = provider

[schedule]
1 cust bank withdraw
)";

} // namespace

TEST_CASE("empty engine run yields an empty transcript", "[simnet]") {
    Engine eng(1);
    eng.run();
    REQUIRE(eng.transcript().empty());
    REQUIRE(eng.now() == 0);
}

TEST_CASE("inboxes drain in ascending actor-id order", "[simnet]") {
    Engine eng(1);
    for (const char* id : {"zeta", "alpha", "mid"})
        eng.add_actor(id, Role::Customer, [](Engine& e, const Message& m) {
            e.note("handled=" + m.receiver);
        });
    // Delivered in this order, handled in id order.
    eng.schedule(0, Message{"zeta", "zeta", "x", {}});
    eng.schedule(0, Message{"alpha", "alpha", "x", {}});
    eng.schedule(0, Message{"mid", "mid", "x", {}});
    eng.run();

    std::vector<std::string> handled;
    for (const auto& l : eng.transcript())
        if (l.find("handled=") != std::string::npos)
            handled.push_back(l.substr(l.find("handled=") + 8));
    REQUIRE(handled == std::vector<std::string>{"alpha", "mid", "zeta"});
}

TEST_CASE("sends arrive one tick later", "[simnet]") {
    Engine eng(1);
    eng.add_actor("a", Role::Customer, [](Engine& e, const Message& m) {
        if (m.ref == "start") e.send("a", "b", "ping", Bytes{1});
    });
    eng.add_actor("b", Role::Customer, [](Engine& e, const Message&) {
        e.note("b-got-ping");
    });
    eng.schedule(3, Message{"a", "a", "start", {}});
    eng.run();
    REQUIRE(count_lines(eng.transcript(), "tick=3 link=a->a ref=start") == 1);
    REQUIRE(count_lines(eng.transcript(), "tick=4 link=a->b ref=ping") == 1);
    REQUIRE(count_lines(eng.transcript(), "tick=4 b-got-ping") == 1);
    REQUIRE(eng.now() == 4);
}

TEST_CASE("ping-pong without end hits the tick limit", "[simnet]") {
    REQUIRE(kDefaultTickLimit == 10000);
    Engine eng(1, 50);
    eng.add_actor("a", Role::Customer, [](Engine& e, const Message& m) {
        e.send("a", "b", "ping", m.payload);
    });
    eng.add_actor("b", Role::Customer, [](Engine& e, const Message& m) {
        e.send("b", "a", "pong", m.payload);
    });
    eng.schedule(0, Message{"a", "a", "ping", {}});
    REQUIRE_THROWS_AS(eng.run(), NonTermination);
}

TEST_CASE("handler protocol errors become transcript records", "[simnet]") {
    Engine eng(1);
    eng.add_actor("a", Role::Customer, [](Engine&, const Message&) {
        throw StateError("already done");
    });
    eng.add_actor("b", Role::Customer, [](Engine&, const Message&) {
        throw IntegrityError("bad tag");
    });
    eng.schedule(0, Message{"a", "a", "x", {}});
    eng.schedule(0, Message{"b", "b", "y", {}});
    eng.run();
    REQUIRE(count_lines(eng.transcript(), "actor=a ref=x error=state-error") == 1);
    REQUIRE(count_lines(eng.transcript(), "actor=b ref=y error=integrity-error") == 1);
}

TEST_CASE("delivery to an unknown actor is a hard error", "[simnet]") {
    Engine eng(1);
    eng.add_actor("a", Role::Customer, [](Engine&, const Message&) {});
    eng.schedule(0, Message{"a", "ghost", "x", {}});
    REQUIRE_THROWS_AS(eng.run(), InvalidParameter);
}

TEST_CASE("scenario text parses into the config model", "[simnet]") {
    scenario::ScenarioSpec spec = scenario::parse_scenario(kOnekpHonest);
    REQUIRE(spec.name == "onekp-honest");
    REQUIRE(spec.protocol == "onekp");
    REQUIRE(spec.seed == 71001);
    REQUIRE(spec.actors.size() == 3);
    REQUIRE(spec.actors[0].id == "cust");
    REQUIRE(spec.actors[0].role == "customer");
    REQUIRE(spec.actors[0].get("desc") == "flowers");
    REQUIRE(spec.actors[2].get_int("limit", 0) == 100000);
    REQUIRE(spec.schedule.size() == 1);
    REQUIRE(spec.schedule[0].tick == 1);
    REQUIRE(spec.schedule[0].sender == "cust");
    REQUIRE(spec.schedule[0].receiver == "shop");
    REQUIRE(spec.schedule[0].ref == "initiate");
}

TEST_CASE("malformed scenario text is rejected", "[simnet]") {
    REQUIRE_THROWS_AS(scenario::parse_scenario("[scenario]\nname = x\n"), ParseError);
    REQUIRE_THROWS_AS(scenario::parse_scenario("key = before-section\n"), ParseError);
    REQUIRE_THROWS_AS(scenario::parse_scenario("[scenario]\nprotocol = fv\n[actor a]\n"
                                               "role = customer\n[actor a]\nrole = mix\n"),
                      ParseError);
    REQUIRE_THROWS_AS(scenario::parse_scenario("[scenario]\nprotocol = fv\n[nonsense]\n"),
                      ParseError);
    REQUIRE_THROWS_AS(
        scenario::parse_scenario("[scenario]\nprotocol = fv\n[schedule]\n1 a b\n"),
        ParseError);
    REQUIRE_THROWS_AS(scenario::parse_scenario("[scenario]\nprotocol = fv\n[actor a]\n"
                                               "role = customer\n[tap]\nfrom = a\nto = a\n"
                                               "action = drop\n"),
                      ParseError);
    REQUIRE_THROWS_AS(scenario::load_scenario("/nonexistent/path.scn"), ParseError);
}

TEST_CASE("identical seed and config give byte-identical transcripts", "[simnet]") {
    for (const char* text : {kOnekpHonest, kFvHonest, kMixRoute, kDualsigHonest,
                             kBlindsigHonest}) {
        scenario::RunResult a = scenario::run_scenario(scenario::parse_scenario(text));
        scenario::RunResult b = scenario::run_scenario(scenario::parse_scenario(text));
        REQUIRE(a.transcript_text() == b.transcript_text());
        REQUIRE(a.summary == b.summary);
        REQUIRE_FALSE(a.transcript.empty());
    }
}

TEST_CASE("honest 1KP scenario ends with an approved authorization", "[simnet]") {
    scenario::RunResult r = scenario::run_scenario(scenario::parse_scenario(kOnekpHonest));
    REQUIRE(count_lines(r.transcript, "decision=yes") == 1);
    REQUIRE(count_lines(r.transcript, "auth=yes") == 1);
    REQUIRE(r.rejects == 0);
    REQUIRE(r.summary.find("auth=yes") != std::string::npos);

    // The decision lands after the full message exchange.
    bool seen_authreq = false;
    for (const auto& l : r.transcript) {
        if (l.find("ref=authreq") != std::string::npos) seen_authreq = true;
        if (l.find("auth=yes") != std::string::npos) REQUIRE(seen_authreq);
    }
}

TEST_CASE("replayed 1KP payment is rejected by the acquirer", "[simnet]") {
    std::string text = kOnekpHonest;
    text += R"(
[tap]
from = cust
to = shop
action = replay
ref = payment
at = 5
)";
    scenario::RunResult r = scenario::run_scenario(scenario::parse_scenario(text));
    REQUIRE(count_lines(r.transcript, "ref=payment bytes=") == 2);
    REQUIRE(count_lines(r.transcript, "replay=1") >= 1);
    REQUIRE(count_lines(r.transcript, "decision=yes") == 1);
    REQUIRE(count_lines(r.transcript, "decision=reject-replay") == 1);
    REQUIRE(count_lines(r.transcript, "auth=yes") == 1);
    REQUIRE(r.rejects > 0);
}

TEST_CASE("honest FV scenario settles and dumps the ledger", "[simnet]") {
    scenario::RunResult r = scenario::run_scenario(scenario::parse_scenario(kFvHonest));
    REQUIRE(count_lines(r.transcript, "state=settled") == 1);
    REQUIRE(count_lines(r.transcript, "step=8a") == 1);
    REQUIRE(count_lines(r.transcript, "account=cust balance=48800") == 1);
    REQUIRE(count_lines(r.transcript, "account=shop balance=1200") == 1);
    REQUIRE(count_lines(r.transcript, "account=bank-c balance=0") == 1);
    REQUIRE(count_lines(r.transcript, "account=bank-m balance=0") == 1);
}

TEST_CASE("replayed FV confirmation cannot double-charge", "[simnet]") {
    std::string text = kFvHonest;
    text += R"(
[tap]
from = cust
to = fv
action = replay
ref = answer
at = 9
)";
    scenario::RunResult r = scenario::run_scenario(scenario::parse_scenario(text));
    REQUIRE(count_lines(r.transcript, "error=state-error") == 1);
    REQUIRE(count_lines(r.transcript, "step=8a") == 1);
    REQUIRE(count_lines(r.transcript, "account=shop balance=1200") == 1);
}

TEST_CASE("fraud answer revokes the vpin in the transcript", "[simnet]") {
    std::string text = kFvHonest;
    std::size_t at = text.find("answer = yes");
    REQUIRE(at != std::string::npos);
    text.replace(at, std::string("answer = yes").size(), "answer = fraud");
    scenario::RunResult r = scenario::run_scenario(scenario::parse_scenario(text));
    REQUIRE(count_lines(r.transcript, "vpin-revoked=") == 1);
    REQUIRE(count_lines(r.transcript, "step=8a") == 0);
    REQUIRE(count_lines(r.transcript, "account=shop balance=0") == 1);
    REQUIRE(r.summary.find("vpin revoked") != std::string::npos);
}

TEST_CASE("unanswered FV confirmation declines at the timeout check", "[simnet]") {
    std::string text = kFvHonest;
    std::size_t at = text.find("answer = yes");
    text.replace(at, std::string("answer = yes").size(), "answer = none");
    text += "30 fv fv check-timeout\n";
    scenario::RunResult r = scenario::run_scenario(scenario::parse_scenario(text));
    REQUIRE(count_lines(r.transcript, "reason=confirm-timeout") == 1);
    REQUIRE(count_lines(r.transcript, "step=8a") == 0);
}

TEST_CASE("mix route delivers through two hops and suppresses replays", "[simnet]") {
    std::string text = kMixRoute;
    text += R"(
[tap]
from = alice
to = m0
action = replay
ref = block
at = 4
)";
    scenario::RunResult r = scenario::run_scenario(scenario::parse_scenario(text));
    REQUIRE(count_lines(r.transcript, "delivered=1") == 1);
    std::string want = "payload=" + to_hex(Bytes{'f', 'r', 'o', 'm', '-', 'a', 'l', 'i',
                                                 'c', 'e'});
    REQUIRE(count_lines(r.transcript, want) == 1);
    REQUIRE(count_lines(r.transcript, "drop=1 duplicates=1") == 1);
}

TEST_CASE("mix link logs show only fixed-size blocks", "[simnet]") {
    std::string text = kMixRoute;
    text += R"(
[tap]
from = alice
to = m0
action = eavesdrop

[tap]
from = m0
to = m1
action = eavesdrop

[tap]
from = m1
to = bob
action = eavesdrop
)";
    scenario::RunResult r = scenario::run_scenario(scenario::parse_scenario(text));
    REQUIRE(r.tap_captures.size() == 3);
    for (const auto& captures : r.tap_captures) {
        REQUIRE(captures.size() == 1);
        for (const Bytes& c : captures) REQUIRE(c.size() == mixnet::kBlockSize);
    }
    // Each hop re-randomizes the block.
    REQUIRE(r.tap_captures[0][0] != r.tap_captures[1][0]);
    REQUIRE(r.tap_captures[1][0] != r.tap_captures[2][0]);
}

TEST_CASE("eavesdropped 1KP links never show the card number or description",
          "[simnet]") {
    std::string text = kOnekpHonest;
    for (const char* link : {"from = cust\nto = shop", "from = shop\nto = cust",
                             "from = shop\nto = acq", "from = acq\nto = shop"}) {
        text += "\n[tap]\n";
        text += link;
        text += "\naction = eavesdrop\n";
    }
    scenario::RunResult r = scenario::run_scenario(scenario::parse_scenario(text));
    REQUIRE(r.tap_captures.size() == 4);
    std::size_t total = 0;
    for (const auto& captures : r.tap_captures) {
        total += captures.size();
        REQUIRE_FALSE(captures_contain(captures, "4556737586899855"));
    }
    REQUIRE(total >= 5);
    // The description crosses the customer-merchant link only inside the
    // acquirer-bound envelope, never in clear on the merchant-acquirer leg.
    REQUIRE_FALSE(captures_contain(r.tap_captures[2], "flowers"));
    REQUIRE_FALSE(captures_contain(r.tap_captures[3], "flowers"));
}

TEST_CASE("dualsig scenario approves honest purchases end to end", "[simnet]") {
    scenario::RunResult r =
        scenario::run_scenario(scenario::parse_scenario(kDualsigHonest));
    REQUIRE(count_lines(r.transcript, "merchant=accept") == 1);
    REQUIRE(count_lines(r.transcript, "gateway=yes") == 2);
    REQUIRE(count_lines(r.transcript, "response-sig=ok") == 1);
    REQUIRE(r.summary.find("gateway=yes") != std::string::npos);

    std::string tamper_oi = kDualsigHonest;
    tamper_oi += R"(
[tap]
from = cust
to = shop
action = tamper
byte = 8
)";
    scenario::RunResult t = scenario::run_scenario(scenario::parse_scenario(tamper_oi));
    REQUIRE(count_lines(t.transcript, "tamper=1") == 1);
    REQUIRE(count_lines(t.transcript, "merchant=reject") == 1);
    REQUIRE(count_lines(t.transcript, "ref=capture") == 0);

    std::string tamper_env = kDualsigHonest;
    tamper_env += R"(
[tap]
from = cust
to = shop
action = tamper
byte = -1
)";
    scenario::RunResult g = scenario::run_scenario(scenario::parse_scenario(tamper_env));
    REQUIRE(count_lines(g.transcript, "merchant=accept") == 1);
    REQUIRE(count_lines(g.transcript, "gateway=reject-envelope") == 2);
}

TEST_CASE("blindsig scenario issues a verifiable coin", "[simnet]") {
    scenario::RunResult r =
        scenario::run_scenario(scenario::parse_scenario(kBlindsigHonest));
    REQUIRE(count_lines(r.transcript, "outcome=accepted") == 1);
    REQUIRE(count_lines(r.transcript, "coin=ok") == 1);
    REQUIRE(r.summary.find("coin=ok") != std::string::npos);
}

TEST_CASE("blindsig scenario detects a malformed revealed coin", "[simnet]") {
    std::string text = kBlindsigHonest;
    std::size_t at = text.find("coins = 10");
    REQUIRE(at != std::string::npos);
    text.insert(at, "cheat = 1\n");
    scenario::RunResult r = scenario::run_scenario(scenario::parse_scenario(text));
    // Seeded challenge keeps an honest candidate unopened, so the
    // malformed one lies among the reveals.
    REQUIRE(count_lines(r.transcript, "outcome=cheating-detected") == 1);
    REQUIRE(count_lines(r.transcript, "coin=denied") == 1);
}
