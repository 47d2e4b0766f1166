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

// Deterministic in-memory message bus. Actors exchange byte payloads in
// discrete ticks; link taps let a configured adversary eavesdrop, replay
// or tamper with traffic at delivery time. Every link event and protocol
// decision lands in an append-only transcript with a stable field order,
// so the same (seed, config) always produces byte-identical output.
//
// Per tick: due messages are delivered through the taps into inboxes,
// then inboxes drain in ascending actor-id order. A handler's sends
// arrive at the next tick. Handlers that throw a protocol error produce
// an `error=` transcript record instead of aborting the run.

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "paysec/bytes.hpp"
#include "paysec/errors.hpp"
#include "paysec/rng.hpp"

namespace paysec::simnet {

using Clock = std::int64_t;

constexpr Clock kDefaultTickLimit = 10000;

enum class Role { Customer, Merchant, Mix, Gateway, Acquirer, Provider, Adversary };

inline const char* to_string(Role r) {
    switch (r) {
    case Role::Customer: return "customer";
    case Role::Merchant: return "merchant";
    case Role::Mix: return "mix";
    case Role::Gateway: return "gateway";
    case Role::Acquirer: return "acquirer";
    case Role::Provider: return "provider";
    case Role::Adversary: return "adversary";
    }
    return "unknown";
}

inline Role role_from_string(const std::string& s) {
    if (s == "customer") return Role::Customer;
    if (s == "merchant") return Role::Merchant;
    if (s == "mix") return Role::Mix;
    if (s == "gateway") return Role::Gateway;
    if (s == "acquirer") return Role::Acquirer;
    if (s == "provider") return Role::Provider;
    if (s == "adversary") return Role::Adversary;
    throw ParseError("unknown role: " + s);
}

struct Message {
    std::string sender;
    std::string receiver;
    std::string ref;
    Bytes payload;
    bool replayed = false;
    bool tampered = false;
};

class Engine;

using Handler = std::function<void(Engine&, const Message&)>;

struct Actor {
    std::string id;
    Role role = Role::Customer;
    std::deque<Message> inbox;
    Handler handler;
};

enum class TapAction { Eavesdrop, Replay, Tamper };

inline const char* to_string(TapAction a) {
    switch (a) {
    case TapAction::Eavesdrop: return "eavesdrop";
    case TapAction::Replay: return "replay";
    case TapAction::Tamper: return "tamper";
    }
    return "unknown";
}

// A passive or active wire tap on one directed link. Replay captures the
// first matching message and injects a byte-identical copy later; tamper
// mutates the first matching payload in flight. Taps handle bytes only,
// never keys.
struct Tap {
    std::string from;
    std::string to;
    TapAction action = TapAction::Eavesdrop;
    std::string match_ref;                   // empty matches any ref
    Clock at_tick = -1;                      // replay injection tick
    std::function<void(Bytes&)> mutate;      // tamper payload edit
    std::vector<Bytes> captured;             // eavesdrop log
    bool fired = false;

    bool matches(const Message& m) const {
        return m.sender == from && m.receiver == to &&
               (match_ref.empty() || match_ref == m.ref);
    }
};

class Engine {
public:
    explicit Engine(std::uint64_t seed, Clock tick_limit = kDefaultTickLimit)
        : seed_(seed), tick_limit_(tick_limit) {}

    Actor& add_actor(const std::string& id, Role role, Handler handler) {
        if (actors_.count(id) != 0) throw InvalidParameter("duplicate actor id: " + id);
        Actor& a = actors_[id];
        a.id = id;
        a.role = role;
        a.handler = std::move(handler);
        return a;
    }

    bool has_actor(const std::string& id) const { return actors_.count(id) != 0; }

    Tap& add_tap(Tap tap) {
        taps_.push_back(std::move(tap));
        return taps_.back();
    }

    const std::vector<Tap>& taps() const { return taps_; }

    // Queues a message for delivery before the run starts.
    void schedule(Clock tick, Message msg) {
        if (tick < 0) throw InvalidParameter("schedule tick must be non-negative");
        pending_[tick].push_back(std::move(msg));
    }

    // Send from inside a handler; arrives next tick.
    void send(const std::string& from, const std::string& to, const std::string& ref,
              Bytes payload) {
        pending_[tick_ + 1].push_back(Message{from, to, ref, std::move(payload)});
    }

    // Records a protocol-level decision with the current tick prefixed.
    void note(const std::string& line) {
        transcript_.push_back("tick=" + std::to_string(tick_) + " " + line);
    }

    Clock now() const { return tick_; }
    std::uint64_t seed() const { return seed_; }

    // Deterministic per-purpose randomness stream.
    Rng rng(std::string_view label) const { return Rng::derive_from(seed_, label); }

    const std::vector<std::string>& transcript() const { return transcript_; }

    std::string transcript_text() const {
        std::string out;
        for (const auto& l : transcript_) {
            out += l;
            out += '\n';
        }
        return out;
    }

    void run() {
        for (;;) {
            deliver_due();
            drain_inboxes();
            if (pending_.empty()) break;
            ++tick_;
            if (tick_ > tick_limit_)
                throw NonTermination("nontermination-error: tick limit " +
                                     std::to_string(tick_limit_) + " exceeded");
        }
    }

private:
    Actor& actor(const std::string& id) {
        auto it = actors_.find(id);
        if (it == actors_.end()) throw InvalidParameter("no such actor: " + id);
        return it->second;
    }

    void deliver_due() {
        auto it = pending_.find(tick_);
        if (it == pending_.end()) return;
        std::vector<Message> due = std::move(it->second);
        pending_.erase(it);
        for (Message& m : due) {
            apply_taps(m);
            std::string line = "tick=" + std::to_string(tick_) + " link=" + m.sender +
                               "->" + m.receiver + " ref=" + m.ref +
                               " bytes=" + std::to_string(m.payload.size());
            if (m.replayed) line += " replay=1";
            if (m.tampered) line += " tamper=1";
            transcript_.push_back(line);
            actor(m.receiver).inbox.push_back(std::move(m));
        }
    }

    void apply_taps(Message& m) {
        for (Tap& tap : taps_) {
            if (!tap.matches(m)) continue;
            switch (tap.action) {
            case TapAction::Eavesdrop:
                tap.captured.push_back(m.payload);
                break;
            case TapAction::Replay:
                // The adversary does not recapture its own injection.
                if (!tap.fired && !m.replayed) {
                    tap.fired = true;
                    tap.captured.push_back(m.payload);
                    Message copy = m;
                    copy.replayed = true;
                    Clock at = tap.at_tick > tick_ ? tap.at_tick : tick_ + 1;
                    pending_[at].push_back(std::move(copy));
                }
                break;
            case TapAction::Tamper:
                if (!tap.fired && !m.replayed) {
                    tap.fired = true;
                    if (tap.mutate) tap.mutate(m.payload);
                    m.tampered = true;
                }
                break;
            }
        }
    }

    void drain_inboxes() {
        for (auto& [id, a] : actors_) {
            while (!a.inbox.empty()) {
                Message m = std::move(a.inbox.front());
                a.inbox.pop_front();
                if (!a.handler) continue;
                try {
                    a.handler(*this, m);
                } catch (const StateError&) {
                    note("actor=" + id + " ref=" + m.ref + " error=state-error");
                } catch (const IntegrityError&) {
                    note("actor=" + id + " ref=" + m.ref + " error=integrity-error");
                } catch (const ParseError&) {
                    note("actor=" + id + " ref=" + m.ref + " error=parse-error");
                } catch (const InvalidParameter&) {
                    note("actor=" + id + " ref=" + m.ref + " error=invalid-parameter");
                } catch (const Error&) {
                    note("actor=" + id + " ref=" + m.ref + " error=protocol-error");
                }
            }
        }
    }

    std::uint64_t seed_;
    Clock tick_limit_;
    Clock tick_ = 0;
    std::map<std::string, Actor> actors_;
    std::vector<Tap> taps_;
    std::map<Clock, std::vector<Message>> pending_;
    std::vector<std::string> transcript_;
};

} // namespace paysec::simnet
