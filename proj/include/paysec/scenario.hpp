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

// Scenario files wire protocol actors onto the simnet bus.
//
// Format: `#` comments, `[scenario]` with name/protocol/seed, one
// `[actor <id>]` section per participant (role= plus protocol params),
// optional `[tap]` sections (from/to/action and, per action, ref/at/byte),
// and a `[schedule]` section of `tick sender receiver message-ref` lines.
//
// A schedule entry is a trigger: at the given tick the sender receives a
// `go:<ref>` self-message carrying the receiver id, and its handler emits
// the real protocol message, which travels as wire bytes on the bus. All
// later traffic flows from the handlers themselves.
//
// Protocols: onekp, fv, dualsig, mix, blindsig.

#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "paysec/blindsig.hpp"
#include "paysec/firstvirtual.hpp"
#include "paysec/mixnet.hpp"
#include "paysec/onekp.hpp"
#include "paysec/setcore.hpp"
#include "paysec/simnet.hpp"

namespace paysec::scenario {

// ---------------------------------------------------------------------------
// Config model and parser

struct ActorSpec {
    std::string id;
    std::string role;
    std::map<std::string, std::string> params;

    std::string get(const std::string& key, const std::string& fallback = "") const {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    }

    std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
        auto it = params.find(key);
        if (it == params.end()) return fallback;
        try {
            return std::stoll(it->second);
        } catch (const std::exception&) {
            throw ParseError("actor " + id + ": bad integer for " + key);
        }
    }
};

struct TapSpec {
    std::string from;
    std::string to;
    std::string action; // eavesdrop | replay | tamper
    std::string ref;
    simnet::Clock at = -1;      // replay injection tick
    std::ptrdiff_t byte = -1;   // tamper index, negative counts from the end
};

struct ScheduleEntry {
    simnet::Clock tick = 0;
    std::string sender;
    std::string receiver;
    std::string ref;
};

struct ScenarioSpec {
    std::string name;
    std::string protocol;
    std::uint64_t seed = 1;
    simnet::Clock tick_limit = simnet::kDefaultTickLimit;
    std::int64_t date_base = 1700000000;
    std::vector<ActorSpec> actors;
    std::vector<TapSpec> taps;
    std::vector<ScheduleEntry> schedule;

    const ActorSpec* find_actor(const std::string& id) const {
        for (const ActorSpec& a : actors)
            if (a.id == id) return &a;
        return nullptr;
    }

    std::vector<const ActorSpec*> actors_with_role(const std::string& role) const {
        std::vector<const ActorSpec*> out;
        for (const ActorSpec& a : actors)
            if (a.role == role) out.push_back(&a);
        return out;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::pair<std::string, std::string> split_kv(const std::string& line) {
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value: " + line);
    return {trim(line.substr(0, eq)), trim(line.substr(eq + 1))};
}

inline std::int64_t to_int(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        std::int64_t v = std::stoll(s, &used);
        if (used != s.size()) throw ParseError("");
        return v;
    } catch (const std::exception&) {
        throw ParseError("bad integer for " + what + ": " + s);
    }
}

inline std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!trim(cur).empty()) out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty()) out.push_back(trim(cur));
    return out;
}

} // namespace detail

inline ScenarioSpec parse_scenario(const std::string& text) {
    ScenarioSpec spec;
    enum class Section { None, Scenario, Actor, Tap, Schedule };
    Section section = Section::None;

    std::istringstream in(text);
    std::string raw;
    while (std::getline(in, raw)) {
        std::string line = detail::trim(raw);
        if (line.empty() || line[0] == '#') continue;

        if (line.front() == '[' && line.back() == ']') {
            std::string head = detail::trim(line.substr(1, line.size() - 2));
            if (head == "scenario") {
                section = Section::Scenario;
            } else if (head.rfind("actor ", 0) == 0) {
                section = Section::Actor;
                ActorSpec actor;
                actor.id = detail::trim(head.substr(6));
                if (actor.id.empty()) throw ParseError("actor section without id");
                if (spec.find_actor(actor.id))
                    throw ParseError("duplicate actor: " + actor.id);
                spec.actors.push_back(std::move(actor));
            } else if (head == "tap") {
                section = Section::Tap;
                spec.taps.emplace_back();
            } else if (head == "schedule") {
                section = Section::Schedule;
            } else {
                throw ParseError("unknown section: [" + head + "]");
            }
            continue;
        }

        switch (section) {
        case Section::None:
            throw ParseError("content before first section: " + line);
        case Section::Scenario: {
            auto [k, v] = detail::split_kv(line);
            if (k == "name") spec.name = v;
            else if (k == "protocol") spec.protocol = v;
            else if (k == "seed") spec.seed = static_cast<std::uint64_t>(detail::to_int(v, k));
            else if (k == "tick-limit") spec.tick_limit = detail::to_int(v, k);
            else if (k == "date-base") spec.date_base = detail::to_int(v, k);
            else throw ParseError("unknown scenario key: " + k);
            break;
        }
        case Section::Actor: {
            auto [k, v] = detail::split_kv(line);
            if (k == "role") spec.actors.back().role = v;
            else spec.actors.back().params[k] = v;
            break;
        }
        case Section::Tap: {
            auto [k, v] = detail::split_kv(line);
            TapSpec& tap = spec.taps.back();
            if (k == "from") tap.from = v;
            else if (k == "to") tap.to = v;
            else if (k == "action") tap.action = v;
            else if (k == "ref") tap.ref = v;
            else if (k == "at") tap.at = detail::to_int(v, k);
            else if (k == "byte") tap.byte = detail::to_int(v, k);
            else throw ParseError("unknown tap key: " + k);
            break;
        }
        case Section::Schedule: {
            std::istringstream ls(line);
            ScheduleEntry entry;
            std::string tick;
            if (!(ls >> tick >> entry.sender >> entry.receiver >> entry.ref))
                throw ParseError("bad schedule line: " + line);
            std::string extra;
            if (ls >> extra) throw ParseError("bad schedule line: " + line);
            entry.tick = detail::to_int(tick, "schedule tick");
            spec.schedule.push_back(std::move(entry));
            break;
        }
        }
    }

    if (spec.protocol.empty()) throw ParseError("scenario has no protocol");
    for (const ActorSpec& a : spec.actors)
        if (a.role.empty()) throw ParseError("actor " + a.id + " has no role");
    for (const ScheduleEntry& e : spec.schedule) {
        if (!spec.find_actor(e.sender)) throw ParseError("schedule: no actor " + e.sender);
        if (!spec.find_actor(e.receiver))
            throw ParseError("schedule: no actor " + e.receiver);
    }
    for (const TapSpec& t : spec.taps) {
        if (t.action != "eavesdrop" && t.action != "replay" && t.action != "tamper")
            throw ParseError("unknown tap action: " + t.action);
        if (!spec.find_actor(t.from) || !spec.find_actor(t.to))
            throw ParseError("tap references unknown actor");
    }
    return spec;
}

inline ScenarioSpec load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open scenario file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

// ---------------------------------------------------------------------------
// Run result and transcript classification

struct RunResult {
    std::string name;
    std::string protocol;
    std::vector<std::string> transcript;
    std::vector<std::vector<Bytes>> tap_captures; // per tap, in spec order
    std::size_t accepts = 0;
    std::size_t rejects = 0;
    std::string summary;

    std::string transcript_text() const {
        std::string out;
        for (const auto& l : transcript) {
            out += l;
            out += '\n';
        }
        return out;
    }
};

namespace detail {

inline bool contains(const std::string& line, const char* token) {
    return line.find(token) != std::string::npos;
}

inline bool is_reject_line(const std::string& l) {
    return contains(l, " error=") || contains(l, " drop=") || contains(l, "reject") ||
           contains(l, "cheating-detected") || contains(l, "reason=") ||
           contains(l, "fraudaborted") || contains(l, "auth=no") ||
           contains(l, "decision=no") || contains(l, "gateway=no") ||
           contains(l, "coin=denied") || contains(l, "coin=bad");
}

inline bool is_accept_line(const std::string& l) {
    return contains(l, "auth=yes") || contains(l, "decision=yes") ||
           contains(l, "gateway=yes") || contains(l, "coin=ok") ||
           contains(l, "delivered=1") || contains(l, "state=settled") ||
           contains(l, "outcome=accepted") || contains(l, "merchant=accept");
}

// Value of the first `key=` token across the transcript lines.
inline std::optional<std::string> first_token(const std::vector<std::string>& lines,
                                              const std::string& key) {
    std::string pat = key + "=";
    for (const auto& l : lines) {
        std::size_t at = l.find(pat);
        if (at == std::string::npos) continue;
        if (at > 0 && l[at - 1] != ' ') continue;
        std::size_t start = at + pat.size();
        std::size_t end = l.find(' ', start);
        return l.substr(start, end == std::string::npos ? std::string::npos : end - start);
    }
    return std::nullopt;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Protocol wirings. Each returns a finisher run after the bus drains and
// keeps its state alive for the engine handlers.

namespace detail {

using Finisher = std::function<void(std::vector<std::string>&)>;

inline crypto::RsaKeyPair actor_keys(const ScenarioSpec& spec, const std::string& id,
                                     unsigned bits = 512) {
    return crypto::generate_keypair(bits, Rng::derive_from(spec.seed, "keys:" + id).u64());
}

inline std::string go_target(const simnet::Message& m) {
    Decoder dec(m.payload);
    std::string target = dec.str();
    dec.expect_done();
    return target;
}

inline simnet::Message make_trigger(const ScheduleEntry& e) {
    simnet::Message m;
    m.sender = e.sender;
    m.receiver = e.sender;
    m.ref = "go:" + e.ref;
    m.payload = Encoder().str(e.receiver).take();
    return m;
}

inline simnet::Tap make_tap(const TapSpec& t) {
    simnet::Tap tap;
    tap.from = t.from;
    tap.to = t.to;
    tap.match_ref = t.ref;
    if (t.action == "eavesdrop") {
        tap.action = simnet::TapAction::Eavesdrop;
    } else if (t.action == "replay") {
        tap.action = simnet::TapAction::Replay;
        tap.at_tick = t.at;
    } else {
        tap.action = simnet::TapAction::Tamper;
        std::ptrdiff_t index = t.byte;
        tap.mutate = [index](Bytes& b) {
            if (b.empty()) return;
            std::ptrdiff_t n = static_cast<std::ptrdiff_t>(b.size());
            std::ptrdiff_t i = index < 0 ? n + index : index;
            if (i < 0 || i >= n) i = n - 1;
            b[static_cast<std::size_t>(i)] ^= 0xFF;
        };
    }
    return tap;
}

// --- onekp -----------------------------------------------------------------

struct OnekpNet {
    struct Customer {
        std::unique_ptr<onekp::CustomerSession> session;
        Rng rng{0};
    };
    crypto::RsaKeyPair ca_keys{};
    crypto::RsaKeyPair acq_keys{};
    std::string acq_actor;
    std::string merchant_actor;
    std::unique_ptr<onekp::Merchant> merchant;
    std::unique_ptr<onekp::Acquirer> acquirer;
    Rng merchant_rng{0};
    std::map<std::string, Customer> customers;      // actor id -> session
    std::map<std::string, std::string> actor_of;    // protocol ID_C -> actor id
    std::int64_t date_base = 0;
};

inline Finisher wire_onekp(simnet::Engine& eng, const ScenarioSpec& spec) {
    auto net = std::make_shared<OnekpNet>();
    net->date_base = spec.date_base;

    auto merchants = spec.actors_with_role("merchant");
    auto acquirers = spec.actors_with_role("acquirer");
    if (merchants.size() != 1 || acquirers.size() != 1)
        throw ParseError("onekp needs exactly one merchant and one acquirer");
    const ActorSpec& mspec = *merchants[0];
    const ActorSpec& aspec = *acquirers[0];

    net->ca_keys = actor_keys(spec, "ca");
    net->acq_keys = actor_keys(spec, aspec.id);
    net->acq_actor = aspec.id;
    net->merchant_actor = mspec.id;

    std::string desc = mspec.get("desc", "goods");
    std::int64_t price = mspec.get_int("price", 100);
    net->merchant = std::make_unique<onekp::Merchant>(
        mspec.id, price, Bytes(desc.begin(), desc.end()));
    net->merchant_rng = Rng::derive_from(spec.seed, "onekp:" + mspec.id);

    onekp::AcquirerConfig config;
    config.id = aspec.id;
    config.amount_limit = aspec.get_int("limit", 100000);
    config.freshness_window = aspec.get_int("window", onekp::kDefaultFreshnessWindow);
    for (const std::string& pan : split_csv(aspec.get("pans", "")))
        config.pan_registry.insert(pan);
    for (const ActorSpec& a : spec.actors)
        if (a.role == "customer" && aspec.get("pans", "").empty())
            config.pan_registry.insert(a.get("pan", "4111111111111111"));
    crypto::Certificate cert =
        crypto::ca_issue(net->ca_keys, "ca", aspec.id, net->acq_keys.public_key());
    net->acquirer = std::make_unique<onekp::Acquirer>(net->acq_keys, config, cert);

    for (const ActorSpec& a : spec.actors) {
        if (a.role != "customer") continue;
        OnekpNet::Customer c;
        c.rng = Rng::derive_from(spec.seed, "onekp:" + a.id);
        std::string cdesc = a.get("desc", desc);
        std::int64_t cprice = a.get_int("price", price);
        setcore::PaymentInstruction pi = setcore::make_payment_instruction(
            a.get("pan", "4111111111111111"), a.get("expiry", "09-2028"),
            c.rng.bytes(setcore::kPanSecretLen), cprice, c.rng);
        c.session = std::make_unique<onekp::CustomerSession>(
            cprice, Bytes(cdesc.begin(), cdesc.end()), pi, c.rng);
        net->actor_of[c.session->id_c()] = a.id;
        net->customers[a.id] = std::move(c);

        eng.add_actor(a.id, simnet::Role::Customer,
                      [net](simnet::Engine& e, const simnet::Message& m) {
                          auto& cust = net->customers.at(m.receiver);
                          if (m.ref == "go:initiate") {
                              onekp::Initiate init = cust.session->initiate();
                              e.send(m.receiver, go_target(m), "initiate", init.encode());
                          } else if (m.ref == "invoice") {
                              onekp::Invoice inv = onekp::Invoice::decode(m.payload);
                              onekp::Payment pay = cust.session->on_invoice(
                                  inv, net->acq_keys.public_key(), cust.rng);
                              e.send(m.receiver, m.sender, "payment", pay.encode());
                          } else if (m.ref == "authresp") {
                              onekp::AuthResponse resp =
                                  onekp::AuthResponse::decode(m.payload);
                              onekp::Decision d = cust.session->on_auth_response(
                                  resp, net->ca_keys.public_key(), net->acq_actor);
                              e.note("onekp actor=" + m.receiver +
                                     " auth=" + onekp::to_string(d));
                          } else {
                              throw InvalidParameter("onekp customer: unknown ref " + m.ref);
                          }
                      });
    }

    eng.add_actor(mspec.id, simnet::Role::Merchant,
                  [net](simnet::Engine& e, const simnet::Message& m) {
                      if (m.ref == "initiate") {
                          onekp::Initiate init = onekp::Initiate::decode(m.payload);
                          onekp::Invoice inv = net->merchant->on_initiate(
                              init, net->date_base + e.now(), net->merchant_rng);
                          e.send(m.receiver, m.sender, "invoice", inv.encode());
                      } else if (m.ref == "payment") {
                          onekp::Payment pay = onekp::Payment::decode(m.payload);
                          onekp::AuthRequest req = net->merchant->on_payment(pay);
                          e.send(m.receiver, net->acq_actor, "authreq", req.encode());
                      } else if (m.ref == "authresp") {
                          onekp::AuthResponse resp = onekp::AuthResponse::decode(m.payload);
                          resp = net->merchant->on_auth_response(resp);
                          const auto& txn = net->merchant->txn(resp.tr_m.tid_m);
                          e.send(m.receiver, net->actor_of.at(txn.id_c), "authresp",
                                 resp.encode());
                      } else {
                          throw InvalidParameter("onekp merchant: unknown ref " + m.ref);
                      }
                  });

    eng.add_actor(aspec.id, simnet::Role::Acquirer,
                  [net](simnet::Engine& e, const simnet::Message& m) {
                      if (m.ref != "authreq")
                          throw InvalidParameter("onekp acquirer: unknown ref " + m.ref);
                      onekp::AuthRequest req = onekp::AuthRequest::decode(m.payload);
                      onekp::AuthResponse resp =
                          net->acquirer->handle(req, net->date_base + e.now());
                      e.note("onekp actor=" + m.receiver +
                             " decision=" + onekp::to_string(resp.decision));
                      e.send(m.receiver, m.sender, "authresp", resp.encode());
                  });

    return [](std::vector<std::string>&) {};
}

// --- fv ----------------------------------------------------------------------

struct FvNet {
    std::unique_ptr<firstvirtual::FvProvider> provider;
    firstvirtual::Ledger ledger;
    std::unique_ptr<firstvirtual::FvFlow> flow;
    std::map<std::string, std::string> vpin_of;     // customer actor -> vpin
    std::map<std::string, std::string> customer_of; // txn id -> customer actor
    std::size_t emitted = 0;
    int counter = 0;

    void flush(simnet::Engine& eng) {
        const auto& lines = flow->transcript();
        for (; emitted < lines.size(); ++emitted) eng.note(lines[emitted]);
    }
};

inline Finisher wire_fv(simnet::Engine& eng, const ScenarioSpec& spec) {
    auto net = std::make_shared<FvNet>();

    auto providers = spec.actors_with_role("provider");
    auto merchants = spec.actors_with_role("merchant");
    if (providers.size() != 1 || merchants.size() != 1)
        throw ParseError("fv needs exactly one provider and one merchant");
    const ActorSpec& pspec = *providers[0];
    const ActorSpec& mspec = *merchants[0];

    net->provider = std::make_unique<firstvirtual::FvProvider>(
        pspec.id, actor_keys(spec, pspec.id));
    firstvirtual::FvConfig config;
    config.large_threshold =
        pspec.get_int("large-threshold", firstvirtual::kDefaultLargeThreshold);
    config.confirm_timeout_ticks =
        pspec.get_int("confirm-timeout", firstvirtual::kDefaultConfirmTimeoutTicks);

    net->ledger.open_account(mspec.id, mspec.get_int("balance", 0));
    Rng vpin_rng = Rng::derive_from(spec.seed, "fv:vpins");
    for (const ActorSpec& a : spec.actors) {
        if (a.role != "customer") continue;
        net->ledger.open_account(a.id, a.get_int("balance", 100000));
        net->provider->register_customer(a.id);
        net->vpin_of[a.id] =
            net->provider->issue_vpin(a.id, a.get("pan", "4111111111111111"), vpin_rng)
                .value;
    }
    net->flow = std::make_unique<firstvirtual::FvFlow>(*net->provider, net->ledger,
                                                       config);

    for (const ActorSpec& a : spec.actors) {
        if (a.role != "customer") continue;
        std::string answer = a.get("answer", "yes");
        std::int64_t amount = a.get_int("amount", 100);
        eng.add_actor(a.id, simnet::Role::Customer,
                      [net, answer, amount](simnet::Engine& e, const simnet::Message& m) {
                          if (m.ref == "go:order") {
                              std::string txn = "t" + std::to_string(++net->counter);
                              net->customer_of[txn] = m.receiver;
                              e.send(m.receiver, go_target(m), "order",
                                     Encoder()
                                         .str(txn)
                                         .str(net->vpin_of.at(m.receiver))
                                         .i64(amount)
                                         .take());
                          } else if (m.ref == "deliver") {
                              // Goods received; nothing to send yet.
                          } else if (m.ref == "confirm-query") {
                              Decoder dec(m.payload);
                              std::string txn = dec.str();
                              dec.expect_done();
                              if (answer == "none") return;
                              e.send(m.receiver, m.sender, "answer",
                                     Encoder().str(txn).str(answer).take());
                          } else {
                              throw InvalidParameter("fv customer: unknown ref " + m.ref);
                          }
                      });
    }

    eng.add_actor(
        mspec.id, simnet::Role::Merchant,
        [net, pid = pspec.id](simnet::Engine& e, const simnet::Message& m) {
            if (m.ref == "order") {
                Decoder dec(m.payload);
                std::string txn = dec.str();
                std::string vpin = dec.str();
                std::int64_t amount = dec.i64();
                dec.expect_done();
                net->flow->step_order(txn, m.sender, m.receiver, vpin, amount);
                net->flush(e);
                e.send(m.receiver, pid, "authorize", Encoder().str(txn).take());
            } else if (m.ref == "authorization") {
                Decoder dec(m.payload);
                std::string txn = dec.str();
                std::int64_t approved = dec.i64();
                dec.expect_done();
                if (approved == 0) return;
                net->flow->step_deliver_and_report(txn);
                net->flush(e);
                e.send(m.receiver, net->customer_of.at(txn), "deliver",
                       Encoder().str(txn).take());
                e.send(m.receiver, pid, "report", Encoder().str(txn).take());
            } else {
                throw InvalidParameter("fv merchant: unknown ref " + m.ref);
            }
        });

    eng.add_actor(
        pspec.id, simnet::Role::Provider,
        [net](simnet::Engine& e, const simnet::Message& m) {
            if (m.ref == "authorize") {
                Decoder dec(m.payload);
                std::string txn = dec.str();
                dec.expect_done();
                firstvirtual::VpinAuthorization auth = net->flow->step_authorize_vpin(txn);
                net->flush(e);
                e.send(m.receiver, m.sender, "authorization",
                       Encoder().str(txn).i64(auth.approved ? 1 : 0).take());
            } else if (m.ref == "report") {
                Decoder dec(m.payload);
                std::string txn = dec.str();
                dec.expect_done();
                net->flow->ask_confirmation(txn, e.now());
                net->flush(e);
                e.send(m.receiver, net->customer_of.at(txn), "confirm-query",
                       Encoder().str(txn).take());
            } else if (m.ref == "answer") {
                Decoder dec(m.payload);
                std::string txn = dec.str();
                std::string ans = dec.str();
                dec.expect_done();
                firstvirtual::ConfirmAnswer answer = firstvirtual::ConfirmAnswer::Yes;
                if (ans == "no") answer = firstvirtual::ConfirmAnswer::No;
                else if (ans == "fraud") answer = firstvirtual::ConfirmAnswer::Fraud;
                else if (ans != "yes") throw ParseError("fv: bad answer " + ans);
                try {
                    net->flow->answer_confirmation(txn, answer, e.now());
                } catch (const Error&) {
                    net->flush(e);
                    throw;
                }
                net->flush(e);
            } else if (m.ref == "go:check-timeout") {
                for (const auto& [txn, cust] : net->customer_of)
                    net->flow->check_timeout(txn, e.now());
                net->flush(e);
            } else {
                throw InvalidParameter("fv provider: unknown ref " + m.ref);
            }
        });

    return [net](std::vector<std::string>& out) {
        for (const std::string& line : net->ledger.dump()) out.push_back(line);
    };
}

// --- dualsig -----------------------------------------------------------------

struct DualsigNet {
    crypto::RsaKeyPair customer_keys{};
    crypto::RsaKeyPair gateway_keys{};
    setcore::GatewayConfig config;
    std::string gateway_actor;
    std::map<std::string, Rng> rngs;
    // The merchant keeps the digests it verified, per customer actor.
    std::map<std::string, std::pair<crypto::Digest, crypto::Digest>> seen;
};

inline Finisher wire_dualsig(simnet::Engine& eng, const ScenarioSpec& spec) {
    auto net = std::make_shared<DualsigNet>();

    auto merchants = spec.actors_with_role("merchant");
    auto gateways = spec.actors_with_role("gateway");
    auto customers = spec.actors_with_role("customer");
    if (merchants.size() != 1 || gateways.size() != 1 || customers.empty())
        throw ParseError("dualsig needs one merchant, one gateway, customers");
    const ActorSpec& mspec = *merchants[0];
    const ActorSpec& gspec = *gateways[0];

    net->gateway_keys = actor_keys(spec, gspec.id);
    net->gateway_actor = gspec.id;
    net->config.gateway_id = gspec.id;
    net->config.amount_limit = gspec.get_int("limit", 500000);
    for (const std::string& pan : split_csv(gspec.get("pans", "")))
        net->config.pan_registry.insert(pan);
    for (const ActorSpec* c : customers)
        if (gspec.get("pans", "").empty())
            net->config.pan_registry.insert(c->get("pan", "4111111111111111"));

    // One signing identity shared by the scenario's customers keeps the
    // wiring small; per-customer keys belong in unit tests.
    net->customer_keys = actor_keys(spec, "dualsig-customer");

    for (const ActorSpec* c : customers) {
        net->rngs.emplace(c->id, Rng::derive_from(spec.seed, "dualsig:" + c->id));
        const ActorSpec cc = *c;
        eng.add_actor(c->id, simnet::Role::Customer,
                      [net, cc](simnet::Engine& e, const simnet::Message& m) {
                          if (m.ref != "go:purchase")
                              throw InvalidParameter("dualsig customer: unknown ref " +
                                                     m.ref);
                          Rng& rng = net->rngs.at(m.receiver);
                          std::int64_t amount = cc.get_int("amount", 4999);
                          setcore::PaymentInstruction pi =
                              setcore::make_payment_instruction(
                                  cc.get("pan", "4111111111111111"),
                                  cc.get("expiry", "09-2028"),
                                  rng.bytes(setcore::kPanSecretLen), amount, rng);
                          std::string desc = cc.get("desc", "goods");
                          setcore::OrderInformation oi{Bytes(desc.begin(), desc.end()),
                                                       amount, go_target(m)};
                          setcore::DualSignedRequest req = setcore::build_request(
                              net->customer_keys, net->gateway_keys.public_key(),
                              net->config.gateway_id, pi, oi, rng);
                          e.send(m.receiver, go_target(m), "purchase", req.encode());
                      });
    }

    eng.add_actor(
        mspec.id, simnet::Role::Merchant,
        [net](simnet::Engine& e, const simnet::Message& m) {
            if (m.ref == "purchase") {
                setcore::DualSignedRequest req = setcore::DualSignedRequest::decode(m.payload);
                if (!setcore::merchant_verify(req, net->customer_keys.public_key())) {
                    e.note("dualsig actor=" + m.receiver + " merchant=reject");
                    return;
                }
                e.note("dualsig actor=" + m.receiver + " merchant=accept");
                setcore::GatewayForward fwd = setcore::merchant_forward(req);
                net->seen[m.sender] = {fwd.pi_hash, fwd.merchant_oi_hash};
                e.send(m.receiver, net->gateway_actor, "capture",
                       Encoder().str(m.sender).bytes(fwd.encode()).take());
            } else if (m.ref == "authresult") {
                Decoder dec(m.payload);
                std::string customer = dec.str();
                std::string result = dec.str();
                setcore::GatewayResponse resp;
                resp.result = setcore::GatewayResult::RejectEnvelope;
                for (auto r : {setcore::GatewayResult::Approved,
                               setcore::GatewayResult::Declined,
                               setcore::GatewayResult::RejectLinkMismatch,
                               setcore::GatewayResult::RejectBadSignature,
                               setcore::GatewayResult::RejectEnvelope})
                    if (result == setcore::to_string(r)) resp.result = r;
                resp.signature = bytes_to_bigint(dec.bytes());
                dec.expect_done();
                const auto& [pi_hash, oi_hash] = net->seen.at(customer);
                bool ok = setcore::verify_gateway_response(
                    resp, pi_hash, oi_hash, net->gateway_keys.public_key());
                e.note("dualsig actor=" + m.receiver + " response-sig=" +
                       (ok ? "ok" : "bad") + " gateway=" + result);
            } else {
                throw InvalidParameter("dualsig merchant: unknown ref " + m.ref);
            }
        });

    eng.add_actor(gspec.id, simnet::Role::Gateway,
                  [net](simnet::Engine& e, const simnet::Message& m) {
                      if (m.ref != "capture")
                          throw InvalidParameter("dualsig gateway: unknown ref " + m.ref);
                      Decoder dec(m.payload);
                      std::string customer = dec.str();
                      setcore::GatewayForward fwd =
                          setcore::GatewayForward::decode(dec.bytes());
                      dec.expect_done();
                      setcore::GatewayResponse resp = setcore::gateway_verify(
                          fwd, net->gateway_keys, net->customer_keys.public_key(),
                          net->config);
                      e.note("dualsig actor=" + m.receiver +
                             " gateway=" + setcore::to_string(resp.result));
                      e.send(m.receiver, m.sender, "authresult",
                             Encoder()
                                 .str(customer)
                                 .str(setcore::to_string(resp.result))
                                 .bytes(bigint_to_bytes(resp.signature))
                                 .take());
                  });

    return [](std::vector<std::string>&) {};
}

// --- mix ---------------------------------------------------------------------

struct MixNet {
    std::map<std::string, std::unique_ptr<mixnet::MixNode>> nodes;
    std::map<std::string, mixnet::Endpoint> endpoints;
    std::map<std::string, Rng> rngs;
    std::map<std::string, std::vector<std::string>> paths; // sender -> mix ids
    std::size_t delivered = 0;
};

inline Finisher wire_mix(simnet::Engine& eng, const ScenarioSpec& spec) {
    auto net = std::make_shared<MixNet>();

    for (const ActorSpec& a : spec.actors) {
        if (a.role == "mix") {
            net->nodes[a.id] = std::make_unique<mixnet::MixNode>(
                a.id, actor_keys(spec, a.id), a.get_int("honest", 1) != 0);
        } else if (a.role == "customer") {
            net->endpoints[a.id] = mixnet::Endpoint{a.id, actor_keys(spec, a.id)};
            net->rngs.emplace(a.id, Rng::derive_from(spec.seed, "mix:" + a.id));
            net->paths[a.id] = split_csv(a.get("path", ""));
        } else {
            throw ParseError("mix scenario: unsupported role " + a.role);
        }
    }

    for (const ActorSpec& a : spec.actors) {
        if (a.role == "mix") {
            eng.add_actor(a.id, simnet::Role::Mix,
                          [net](simnet::Engine& e, const simnet::Message& m) {
                              if (m.ref != "block")
                                  throw InvalidParameter("mix node: unknown ref " + m.ref);
                              mixnet::MixNode& node = *net->nodes.at(m.receiver);
                              auto out = node.process(mixnet::OnionPacket{m.payload});
                              if (!out) {
                                  e.note("mix actor=" + m.receiver + " drop=1 duplicates=" +
                                         std::to_string(node.duplicate_drops()) +
                                         " decrypt-fails=" +
                                         std::to_string(node.decrypt_drops()));
                                  return;
                              }
                              if (out->kind == mixnet::PeelResult::Kind::Forward)
                                  e.send(m.receiver, out->next_hop, "block",
                                         out->packet.block);
                              else if (out->kind == mixnet::PeelResult::Kind::Dummy)
                                  e.note("mix actor=" + m.receiver + " dummy=1");
                          });
            continue;
        }
        const std::string payload_text = a.get("payload", "hello");
        eng.add_actor(
            a.id, simnet::Role::Customer,
            [net, payload_text](simnet::Engine& e, const simnet::Message& m) {
                if (m.ref == "go:packet") {
                    std::string target = go_target(m);
                    std::vector<mixnet::MixKeyInfo> path;
                    for (const std::string& hop : net->paths.at(m.receiver))
                        path.push_back(net->nodes.at(hop)->info());
                    Bytes payload(payload_text.begin(), payload_text.end());
                    mixnet::OnionPacket pkt =
                        mixnet::build_onion(path, net->endpoints.at(target).info(),
                                            payload, net->rngs.at(m.receiver));
                    std::string first = path.empty() ? target : path.front().id;
                    e.send(m.receiver, first, "block", pkt.block);
                } else if (m.ref == "block") {
                    const mixnet::Endpoint& ep = net->endpoints.at(m.receiver);
                    mixnet::PeelResult r =
                        mixnet::peel(ep.keys, ep.id, mixnet::OnionPacket{m.payload});
                    if (r.kind == mixnet::PeelResult::Kind::Deliver) {
                        ++net->delivered;
                        e.note("mix actor=" + m.receiver +
                               " delivered=1 payload=" + to_hex(r.payload));
                    } else if (r.kind == mixnet::PeelResult::Kind::Dummy) {
                        e.note("mix actor=" + m.receiver + " dummy=1");
                    }
                } else {
                    throw InvalidParameter("mix endpoint: unknown ref " + m.ref);
                }
            });
    }

    return [](std::vector<std::string>&) {};
}

// --- blindsig ------------------------------------------------------------------

struct BlindsigNet {
    crypto::RsaKeyPair bank_keys{};
    std::string bank_actor;
    Rng bank_rng{0};
    struct Wallet {
        std::vector<blindsig::BlindingSession> candidates;
        Rng rng{0};
    };
    std::map<std::string, Wallet> wallets;
    std::map<std::string, std::vector<BigInt>> submitted; // customer actor -> blinded
    std::map<std::string, std::size_t> chosen;
};

inline bool coin_valid(const Bytes& message) {
    static const std::set<std::int64_t> denominations{1, 2, 5, 10, 20, 50, 100};
    try {
        Decoder dec(message);
        std::string tag = dec.str();
        std::int64_t denom = dec.i64();
        Bytes serial = dec.bytes();
        dec.expect_done();
        return tag == "coin" && denominations.count(denom) == 1 && serial.size() == 16;
    } catch (const Error&) {
        return false;
    }
}

inline Finisher wire_blindsig(simnet::Engine& eng, const ScenarioSpec& spec) {
    auto net = std::make_shared<BlindsigNet>();

    auto banks = spec.actors_with_role("provider");
    if (banks.size() != 1) throw ParseError("blindsig needs exactly one provider");
    net->bank_actor = banks[0]->id;
    net->bank_keys = actor_keys(spec, net->bank_actor);
    net->bank_rng = Rng::derive_from(spec.seed, "blindsig:" + net->bank_actor);

    for (const ActorSpec& a : spec.actors) {
        if (a.role != "customer") continue;
        BlindsigNet::Wallet w;
        w.rng = Rng::derive_from(spec.seed, "blindsig:" + a.id);
        net->wallets[a.id] = std::move(w);
        const std::int64_t denom = a.get_int("denom", 10);
        const std::int64_t count = a.get_int("coins", 10);
        const bool cheat = a.get_int("cheat", 0) != 0;
        eng.add_actor(
            a.id, simnet::Role::Customer,
            [net, denom, count, cheat](simnet::Engine& e, const simnet::Message& m) {
                auto& w = net->wallets.at(m.receiver);
                if (m.ref == "go:withdraw") {
                    std::vector<Bytes> coins;
                    for (std::int64_t i = 0; i < count; ++i)
                        coins.push_back(Encoder()
                                            .str("coin")
                                            .i64(denom)
                                            .bytes(w.rng.bytes(16))
                                            .take());
                    if (cheat && !coins.empty()) coins[0] = w.rng.bytes(24);
                    w.candidates = blindsig::prepare_candidates(
                        coins, net->bank_keys.public_key(), w.rng);
                    Encoder enc;
                    enc.u64(w.candidates.size());
                    for (const auto& c : w.candidates)
                        enc.bytes(bigint_to_bytes(c.blinded));
                    e.send(m.receiver, go_target(m), "withdraw", enc.take());
                } else if (m.ref == "challenge") {
                    Decoder dec(m.payload);
                    std::size_t keep = static_cast<std::size_t>(dec.u64());
                    dec.expect_done();
                    Encoder enc;
                    enc.u64(w.candidates.size() - 1);
                    for (std::size_t i = 0; i < w.candidates.size(); ++i) {
                        if (i == keep) continue;
                        enc.u64(i)
                            .bytes(w.candidates[i].message)
                            .bytes(bigint_to_bytes(w.candidates[i].k));
                    }
                    e.send(m.receiver, m.sender, "reveal", enc.take());
                } else if (m.ref == "coin") {
                    Decoder dec(m.payload);
                    std::size_t keep = static_cast<std::size_t>(dec.u64());
                    BigInt sig = bytes_to_bigint(dec.bytes());
                    dec.expect_done();
                    blindsig::BlindingSession& s = w.candidates.at(keep);
                    s.blind_sig = sig;
                    BigInt unblinded = blindsig::unblind(s);
                    bool ok = crypto::verify(net->bank_keys.public_key(), s.message,
                                             unblinded);
                    e.note("blindsig actor=" + m.receiver +
                           std::string(ok ? " coin=ok" : " coin=bad"));
                } else if (m.ref == "deny") {
                    e.note("blindsig actor=" + m.receiver + " coin=denied");
                } else {
                    throw InvalidParameter("blindsig customer: unknown ref " + m.ref);
                }
            });
    }

    eng.add_actor(
        net->bank_actor, simnet::Role::Provider,
        [net](simnet::Engine& e, const simnet::Message& m) {
            if (m.ref == "withdraw") {
                Decoder dec(m.payload);
                std::size_t count = static_cast<std::size_t>(dec.u64());
                std::vector<BigInt> blinded;
                for (std::size_t i = 0; i < count; ++i)
                    blinded.push_back(bytes_to_bigint(dec.bytes()));
                dec.expect_done();
                std::size_t keep = blindsig::choose_unrevealed(count, net->bank_rng);
                net->submitted[m.sender] = std::move(blinded);
                net->chosen[m.sender] = keep;
                e.send(m.receiver, m.sender, "challenge", Encoder().u64(keep).take());
            } else if (m.ref == "reveal") {
                Decoder dec(m.payload);
                std::size_t count = static_cast<std::size_t>(dec.u64());
                std::vector<blindsig::Reveal> reveals;
                for (std::size_t i = 0; i < count; ++i) {
                    blindsig::Reveal r;
                    r.index = static_cast<std::size_t>(dec.u64());
                    r.message = dec.bytes();
                    r.k = bytes_to_bigint(dec.bytes());
                    reveals.push_back(std::move(r));
                }
                dec.expect_done();
                const auto& blinded = net->submitted.at(m.sender);
                bool ok = blindsig::validate_reveals(blinded, reveals, coin_valid,
                                                     net->bank_keys.public_key());
                if (!ok) {
                    e.note("blindsig actor=" + m.receiver + " outcome=cheating-detected");
                    e.send(m.receiver, m.sender, "deny", Bytes{});
                    return;
                }
                std::size_t keep = net->chosen.at(m.sender);
                BigInt sig = blindsig::sign_blinded(net->bank_keys, blinded.at(keep));
                e.note("blindsig actor=" + m.receiver + " outcome=accepted");
                e.send(m.receiver, m.sender, "coin",
                       Encoder().u64(keep).bytes(bigint_to_bytes(sig)).take());
            } else {
                throw InvalidParameter("blindsig provider: unknown ref " + m.ref);
            }
        });

    return [](std::vector<std::string>&) {};
}

} // namespace detail

// ---------------------------------------------------------------------------

inline RunResult run_scenario(const ScenarioSpec& spec) {
    simnet::Engine eng(spec.seed, spec.tick_limit);

    detail::Finisher finish;
    if (spec.protocol == "onekp") finish = detail::wire_onekp(eng, spec);
    else if (spec.protocol == "fv") finish = detail::wire_fv(eng, spec);
    else if (spec.protocol == "dualsig") finish = detail::wire_dualsig(eng, spec);
    else if (spec.protocol == "mix") finish = detail::wire_mix(eng, spec);
    else if (spec.protocol == "blindsig") finish = detail::wire_blindsig(eng, spec);
    else throw ParseError("unknown protocol: " + spec.protocol);

    for (const TapSpec& t : spec.taps) eng.add_tap(detail::make_tap(t));
    for (const ScheduleEntry& e : spec.schedule)
        eng.schedule(e.tick, detail::make_trigger(e));

    eng.run();

    RunResult result;
    result.name = spec.name;
    result.protocol = spec.protocol;
    result.transcript = eng.transcript();
    for (const simnet::Tap& tap : eng.taps()) result.tap_captures.push_back(tap.captured);
    finish(result.transcript);

    for (const std::string& line : result.transcript) {
        if (detail::is_reject_line(line)) ++result.rejects;
        else if (detail::is_accept_line(line)) ++result.accepts;
    }

    std::string summary = "scenario=" + spec.name + " protocol=" + spec.protocol +
                          " accepts=" + std::to_string(result.accepts) +
                          " rejects=" + std::to_string(result.rejects);
    if (spec.protocol == "onekp") {
        if (auto v = detail::first_token(result.transcript, "auth")) summary += " auth=" + *v;
    } else if (spec.protocol == "fv") {
        bool revoked = false;
        for (const auto& l : result.transcript)
            if (l.find("vpin-revoked=") != std::string::npos) revoked = true;
        if (revoked) summary += " vpin revoked";
    } else if (spec.protocol == "dualsig") {
        if (auto v = detail::first_token(result.transcript, "gateway"))
            summary += " gateway=" + *v;
        else if (auto w = detail::first_token(result.transcript, "merchant"))
            summary += " merchant=" + *w;
    } else if (spec.protocol == "mix") {
        std::size_t delivered = 0;
        for (const auto& l : result.transcript)
            if (l.find("delivered=1") != std::string::npos) ++delivered;
        summary += " delivered=" + std::to_string(delivered);
    } else if (spec.protocol == "blindsig") {
        if (auto v = detail::first_token(result.transcript, "coin")) summary += " coin=" + *v;
        else if (auto w = detail::first_token(result.transcript, "outcome"))
            summary += " outcome=" + *w;
    }
    result.summary = summary;
    return result;
}

inline RunResult run_scenario_file(const std::string& path) {
    return run_scenario(load_scenario(path));
}

} // namespace paysec::scenario
