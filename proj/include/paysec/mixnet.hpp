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

// Mix chain: layered onion construction and peeling, anonymous return
// addresses, fixed-size blocks with dummy traffic, and matrix routing.
//
// Wire block layout (always exactly kBlockSize bytes):
//
//   [u32 len][layer][u32 len][channel][filler]
//
// where `layer` is one encryption layer
//
//   [RSA-wrapped key: byte_length(n)][nonce: 12][AEAD ct]
//
// whose plaintext is the canonical record (addr, hop_key, inner):
//   - addr != holder id: forward `inner` (the next layer) to addr
//   - addr == holder id: `inner` is [tag][body]; tag 0x00 dummy,
//     0x01 real payload, 0x02 reply token
//
// `channel` carries reply payloads for anonymous return addresses; a hop
// whose layer contains a hop_key re-encrypts the channel with it, so the
// reply body changes bit patterns at every hop and only the original
// sender, who kept all hop keys, can strip them.
//
// Filler is derived from a hash of the framed content, which makes a
// node's output a pure function of the input block: batch output order
// (sorted by output bytes) cannot depend on arrival order.
//
// Per-layer overhead is byte_length(n) + 40 bytes of wrap/nonce/tag plus
// 12 bytes of record framing and the addr/hop-key bytes; with 512-bit
// node keys a 5-layer onion (path length 4) leaves roughly 1.4 KiB of
// payload budget.

#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "paysec/crypto.hpp"

namespace paysec::mixnet {

constexpr std::size_t kBlockSize = 2048;
constexpr std::size_t kReplyChannelSize = 1024;

constexpr std::uint8_t kTagDummy = 0x00;
constexpr std::uint8_t kTagReal = 0x01;
constexpr std::uint8_t kTagReplyToken = 0x02;

struct OnionPacket {
    Bytes block; // exactly kBlockSize
};

enum class PacketKind : std::uint8_t { Dummy = kTagDummy, Real = kTagReal };

struct MixKeyInfo {
    std::string id;
    crypto::RsaPublicKey key;
};

namespace detail {

inline Bytes zero_nonce() {
    return Bytes(crypto::kNonceLen, 0);
}

inline Bytes encrypt_layer(const MixKeyInfo& node, const Bytes& plain, Rng& rng) {
    Bytes key = rng.bytes(crypto::kSymKeyLen);
    Bytes out = crypto::rsa_wrap_key(node.key, key, rng);
    Bytes nonce = rng.bytes(crypto::kNonceLen);
    out.insert(out.end(), nonce.begin(), nonce.end());
    Bytes ct = crypto::sym_encrypt(key, nonce, plain);
    out.insert(out.end(), ct.begin(), ct.end());
    return out;
}

inline Bytes decrypt_layer(const crypto::RsaKeyPair& keys, const Bytes& layer) {
    std::size_t k = byte_length(keys.n);
    if (layer.size() < k + crypto::kNonceLen + crypto::kTagLen)
        throw IntegrityError("mix layer too short");
    Bytes wrapped(layer.begin(), layer.begin() + static_cast<std::ptrdiff_t>(k));
    Bytes key = crypto::rsa_unwrap_key(keys, wrapped);
    Bytes nonce(layer.begin() + static_cast<std::ptrdiff_t>(k),
                layer.begin() + static_cast<std::ptrdiff_t>(k + crypto::kNonceLen));
    Bytes ct(layer.begin() + static_cast<std::ptrdiff_t>(k + crypto::kNonceLen), layer.end());
    return crypto::sym_decrypt(key, nonce, ct);
}

} // namespace detail

// Pads framed content to the fixed block size with content-derived filler.
inline OnionPacket frame_block(const Bytes& layer, const Bytes& channel = {}) {
    Bytes content = Encoder().bytes(layer).bytes(channel).take();
    if (content.size() > kBlockSize)
        throw PayloadTooLarge("onion block exceeds fixed block size");
    Bytes filler = crypto::mgf1(crypto::digest_bytes(crypto::sha256(content)),
                                kBlockSize - content.size());
    content.insert(content.end(), filler.begin(), filler.end());
    return OnionPacket{std::move(content)};
}

inline std::pair<Bytes, Bytes> unframe_block(const OnionPacket& packet) {
    if (packet.block.size() != kBlockSize)
        throw IntegrityError("wire block has wrong size");
    Decoder dec(packet.block);
    Bytes layer = dec.bytes();
    Bytes channel = dec.bytes();
    // Filler is canonical, so a block twiddled anywhere is rejected and a
    // replay cannot disguise itself by mutating pad bytes.
    std::size_t content_len = 8 + layer.size() + channel.size();
    Bytes content(packet.block.begin(),
                  packet.block.begin() + static_cast<std::ptrdiff_t>(content_len));
    Bytes filler = crypto::mgf1(crypto::digest_bytes(crypto::sha256(content)),
                                kBlockSize - content_len);
    if (!std::equal(filler.begin(), filler.end(),
                    packet.block.begin() + static_cast<std::ptrdiff_t>(content_len)))
        throw IntegrityError("wire block filler mismatch");
    return {std::move(layer), std::move(channel)};
}

// E_first(next, E_next(...E_recipient(recipient, tag || payload)...)).
// An empty path yields the single final layer, peeled by the recipient.
inline OnionPacket build_onion(const std::vector<MixKeyInfo>& path,
                               const MixKeyInfo& recipient, const Bytes& payload,
                               Rng& rng, PacketKind kind = PacketKind::Real) {
    Bytes body;
    body.reserve(payload.size() + 1);
    body.push_back(static_cast<std::uint8_t>(kind));
    body.insert(body.end(), payload.begin(), payload.end());
    Bytes plain = Encoder().str(recipient.id).bytes(Bytes{}).bytes(body).take();
    Bytes layer = detail::encrypt_layer(recipient, plain, rng);
    for (std::size_t i = path.size(); i-- > 0;) {
        const std::string& next_id = i + 1 < path.size() ? path[i + 1].id : recipient.id;
        Bytes hop_plain = Encoder().str(next_id).bytes(Bytes{}).bytes(layer).take();
        layer = detail::encrypt_layer(path[i], hop_plain, rng);
    }
    return frame_block(layer);
}

struct PeelResult {
    enum class Kind { Forward, Deliver, Dummy, Reply };
    Kind kind = Kind::Dummy;
    std::string next_hop;      // Forward
    OnionPacket packet;        // Forward: re-padded block for the next hop
    Bytes payload;             // Deliver
    std::uint64_t reply_id = 0; // Reply
    Bytes channel;             // Reply: wrapped reply body
};

// Removes one encryption layer. Throws IntegrityError/ParseError when the
// block is not addressed to these keys or was tampered with.
inline PeelResult peel(const crypto::RsaKeyPair& keys, const std::string& own_id,
                       const OnionPacket& packet) {
    auto [layer, channel] = unframe_block(packet);
    Bytes plain = detail::decrypt_layer(keys, layer);
    Decoder dec(plain);
    std::string addr = dec.str();
    Bytes hop_key = dec.bytes();
    Bytes inner = dec.bytes();
    dec.expect_done();

    if (!hop_key.empty())
        channel = crypto::sym_encrypt(hop_key, detail::zero_nonce(), channel);

    PeelResult result;
    if (addr != own_id) {
        result.kind = PeelResult::Kind::Forward;
        result.next_hop = addr;
        result.packet = frame_block(inner, channel);
        return result;
    }
    if (inner.empty())
        throw IntegrityError("empty final layer");
    switch (inner[0]) {
    case kTagDummy:
        result.kind = PeelResult::Kind::Dummy;
        return result;
    case kTagReal:
        result.kind = PeelResult::Kind::Deliver;
        result.payload.assign(inner.begin() + 1, inner.end());
        return result;
    case kTagReplyToken: {
        if (inner.size() != 9)
            throw IntegrityError("bad reply token");
        std::uint64_t id = 0;
        for (int i = 1; i <= 8; ++i) id = id << 8 | inner[static_cast<std::size_t>(i)];
        result.kind = PeelResult::Kind::Reply;
        result.reply_id = id;
        result.channel = channel;
        return result;
    }
    default:
        throw IntegrityError("unknown final-layer tag");
    }
}

// ---------------------------------------------------------------------------
// Anonymous return addresses. The builder nests one layer per reverse-path
// mix, each carrying a fresh hop key; the recipient of the RA only learns
// the first hop.

struct ReturnAddress {
    std::string first_hop;
    Bytes opaque;                    // layer for the first reverse-path mix
    Bytes reply_key;                 // one-time key for the replying party
    std::size_t reply_plain_size = 0; // fixed pre-wrap frame size
};

struct ReturnAddressSecret {
    std::uint64_t reply_id = 0;
    std::vector<Bytes> hop_keys; // in reverse-path order
    Bytes reply_key;
};

inline std::pair<ReturnAddress, ReturnAddressSecret>
build_return_address(const std::vector<MixKeyInfo>& reverse_path, const MixKeyInfo& sender,
                     Rng& rng) {
    if (reverse_path.empty())
        throw InvalidParameter("return address needs at least one mix");
    ReturnAddressSecret secret;
    secret.reply_id = rng.u64();
    secret.reply_key = rng.bytes(crypto::kSymKeyLen);
    for (std::size_t i = 0; i < reverse_path.size(); ++i)
        secret.hop_keys.push_back(rng.bytes(crypto::kSymKeyLen));

    Bytes token;
    token.push_back(kTagReplyToken);
    for (int i = 7; i >= 0; --i)
        token.push_back(static_cast<std::uint8_t>(secret.reply_id >> (8 * i)));
    Bytes layer = detail::encrypt_layer(
        sender, Encoder().str(sender.id).bytes(Bytes{}).bytes(token).take(), rng);
    for (std::size_t i = reverse_path.size(); i-- > 0;) {
        const std::string& next_id =
            i + 1 < reverse_path.size() ? reverse_path[i + 1].id : sender.id;
        Bytes plain =
            Encoder().str(next_id).bytes(secret.hop_keys[i]).bytes(layer).take();
        layer = detail::encrypt_layer(reverse_path[i], plain, rng);
    }

    ReturnAddress ra;
    ra.first_hop = reverse_path[0].id;
    ra.opaque = layer;
    ra.reply_key = secret.reply_key;
    std::size_t wraps = reverse_path.size() + 1;
    if (kReplyChannelSize < wraps * crypto::kTagLen + 8)
        throw InvalidParameter("reverse path too long for reply channel");
    ra.reply_plain_size = kReplyChannelSize - wraps * crypto::kTagLen;
    return {std::move(ra), std::move(secret)};
}

// Used by the party holding a ReturnAddress to send a reply into the mix
// network; returns the first hop and the wire block.
inline std::pair<std::string, OnionPacket> reply_send(const ReturnAddress& ra,
                                                      const Bytes& payload) {
    if (payload.size() + 4 > ra.reply_plain_size)
        throw PayloadTooLarge("reply payload exceeds channel capacity");
    Bytes plain(ra.reply_plain_size, 0);
    std::uint32_t len = static_cast<std::uint32_t>(payload.size());
    plain[0] = static_cast<std::uint8_t>(len >> 24);
    plain[1] = static_cast<std::uint8_t>(len >> 16);
    plain[2] = static_cast<std::uint8_t>(len >> 8);
    plain[3] = static_cast<std::uint8_t>(len);
    std::copy(payload.begin(), payload.end(), plain.begin() + 4);
    Bytes channel = crypto::sym_encrypt(ra.reply_key, detail::zero_nonce(), plain);
    return {ra.first_hop, frame_block(ra.opaque, channel)};
}

// Strips the per-hop wraps (outermost first) and the reply key.
inline Bytes open_reply(const ReturnAddressSecret& secret, const Bytes& channel) {
    Bytes cur = channel;
    for (std::size_t i = secret.hop_keys.size(); i-- > 0;)
        cur = crypto::sym_decrypt(secret.hop_keys[i], detail::zero_nonce(), cur);
    Bytes plain = crypto::sym_decrypt(secret.reply_key, detail::zero_nonce(), cur);
    if (plain.size() < 4)
        throw IntegrityError("reply frame too short");
    std::uint32_t len = static_cast<std::uint32_t>(plain[0]) << 24 |
                        static_cast<std::uint32_t>(plain[1]) << 16 |
                        static_cast<std::uint32_t>(plain[2]) << 8 |
                        static_cast<std::uint32_t>(plain[3]);
    if (4 + static_cast<std::size_t>(len) > plain.size())
        throw IntegrityError("bad reply length");
    return Bytes(plain.begin() + 4, plain.begin() + 4 + len);
}

// ---------------------------------------------------------------------------
// Mix node: batch collection, duplicate suppression, deterministic
// output order, optional input->output logging for corrupt nodes.

class MixNode {
public:
    MixNode(std::string id, crypto::RsaKeyPair keys, bool honest = true)
        : id_(std::move(id)), keys_(std::move(keys)), honest_(honest) {}

    const std::string& id() const { return id_; }
    const crypto::RsaKeyPair& keys() const { return keys_; }
    MixKeyInfo info() const { return {id_, keys_.public_key()}; }
    bool honest() const { return honest_; }

    // Single-packet processing; malformed or replayed packets are dropped
    // and counted.
    std::optional<PeelResult> process(const OnionPacket& packet) {
        crypto::Digest fp = crypto::sha256(packet.block);
        if (!seen_.insert(fp).second) {
            ++duplicate_drops_;
            return std::nullopt;
        }
        try {
            PeelResult r = peel(keys_, id_, packet);
            if (!honest_ && r.kind == PeelResult::Kind::Forward)
                corrupt_log_.push_back({packet.block, r.packet.block});
            return r;
        } catch (const Error&) {
            ++decrypt_drops_;
            return std::nullopt;
        }
    }

    void submit(const OnionPacket& packet) { batch_.push_back(packet); }

    // Flushes the collected batch. Results come back sorted by output
    // block bytes, so the emitted order is independent of arrival order.
    std::vector<PeelResult> flush() {
        std::vector<PeelResult> out;
        for (const OnionPacket& p : batch_) {
            if (auto r = process(p)) out.push_back(std::move(*r));
        }
        batch_.clear();
        std::sort(out.begin(), out.end(), [](const PeelResult& a, const PeelResult& b) {
            if (a.packet.block != b.packet.block) return a.packet.block < b.packet.block;
            return a.payload < b.payload;
        });
        return out;
    }

    std::size_t decrypt_drops() const { return decrypt_drops_; }
    std::size_t duplicate_drops() const { return duplicate_drops_; }

    // Input->output mapping a corrupt operator hands to the adversary.
    const std::vector<std::pair<Bytes, Bytes>>& corrupt_log() const { return corrupt_log_; }

private:
    std::string id_;
    crypto::RsaKeyPair keys_;
    bool honest_;
    std::vector<OnionPacket> batch_;
    std::set<crypto::Digest> seen_;
    std::size_t decrypt_drops_ = 0;
    std::size_t duplicate_drops_ = 0;
    std::vector<std::pair<Bytes, Bytes>> corrupt_log_;
};

// ---------------------------------------------------------------------------
// Matrix of mixes: a path visits exactly one node per column, chosen
// uniformly and independently.

struct MixMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::vector<MixKeyInfo>> grid; // grid[row][col]

    const MixKeyInfo& at(std::size_t row, std::size_t col) const { return grid[row][col]; }
};

inline std::vector<MixKeyInfo> choose_path(const MixMatrix& matrix, Rng& rng) {
    if (matrix.rows == 0 || matrix.cols == 0)
        throw InvalidParameter("choose_path: empty matrix");
    std::vector<MixKeyInfo> path;
    path.reserve(matrix.cols);
    for (std::size_t col = 0; col < matrix.cols; ++col) {
        std::size_t row = static_cast<std::size_t>(rng.below(matrix.rows));
        path.push_back(matrix.grid[row][col]);
    }
    return path;
}

// ---------------------------------------------------------------------------
// Constant-rate traffic schedule. Every sender emits exactly `rate` blocks
// per tick; slots draw a path and a destination from the sender's seeded
// stream regardless of whether real traffic is pending, and a queued
// message goes out when a slot draws its receiver. Receivers silently
// drop dummies, so per-link volumes are a function of the seed alone.

struct Endpoint {
    std::string id;
    crypto::RsaKeyPair keys;

    MixKeyInfo info() const { return {id, keys.public_key()}; }
};

struct ScheduledMessage {
    std::size_t tick = 1; // earliest tick the message may leave
    std::string sender;
    std::string receiver;
    Bytes payload;
};

struct Delivery {
    std::size_t tick = 0;
    std::string receiver;
    Bytes payload;
};

struct TrafficTranscript {
    std::vector<std::string> lines; // link and deliver records in emit order
    std::map<std::pair<std::string, std::string>, std::size_t> link_totals;
    std::vector<Delivery> deliveries;

    // Only the `tick= link= blocks=` lines; payload digests excluded.
    std::vector<std::string> link_lines() const {
        std::vector<std::string> out;
        for (const auto& l : lines)
            if (l.rfind("tick=", 0) == 0) out.push_back(l);
        return out;
    }
};

constexpr std::size_t kTrafficPayloadSize = 256;

namespace detail {

inline Bytes pad_traffic_payload(const Bytes& payload) {
    if (payload.size() + 4 > kTrafficPayloadSize)
        throw PayloadTooLarge("traffic payload exceeds slot size");
    Bytes out(kTrafficPayloadSize, 0);
    std::uint32_t len = static_cast<std::uint32_t>(payload.size());
    out[0] = static_cast<std::uint8_t>(len >> 24);
    out[1] = static_cast<std::uint8_t>(len >> 16);
    out[2] = static_cast<std::uint8_t>(len >> 8);
    out[3] = static_cast<std::uint8_t>(len);
    std::copy(payload.begin(), payload.end(), out.begin() + 4);
    return out;
}

inline Bytes unpad_traffic_payload(const Bytes& padded) {
    if (padded.size() != kTrafficPayloadSize)
        throw IntegrityError("bad traffic payload size");
    std::uint32_t len = static_cast<std::uint32_t>(padded[0]) << 24 |
                        static_cast<std::uint32_t>(padded[1]) << 16 |
                        static_cast<std::uint32_t>(padded[2]) << 8 |
                        static_cast<std::uint32_t>(padded[3]);
    if (4 + static_cast<std::size_t>(len) > padded.size())
        throw IntegrityError("bad traffic payload length");
    return Bytes(padded.begin() + 4, padded.begin() + 4 + len);
}

} // namespace detail

// The node matrix is owned by the caller; each sender-slot draw consumes
// the same amount of that sender's stream whether or not real traffic is
// pending, so link volumes depend only on the seed.
inline TrafficTranscript run_traffic_schedule(const std::vector<std::string>& sender_ids,
                                              std::vector<std::vector<MixNode>>& matrix_nodes,
                                              std::vector<Endpoint>& receivers,
                                              const std::vector<ScheduledMessage>& messages,
                                              std::size_t ticks, std::size_t rate,
                                              std::uint64_t seed) {
    if (rate < 1) throw InvalidParameter("traffic rate must be at least 1");
    if (matrix_nodes.empty() || matrix_nodes[0].empty())
        throw InvalidParameter("traffic schedule needs a non-empty matrix");
    std::size_t rows = matrix_nodes.size();
    std::size_t cols = matrix_nodes[0].size();

    MixMatrix matrix;
    matrix.rows = rows;
    matrix.cols = cols;
    matrix.grid.resize(rows);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            matrix.grid[r].push_back(matrix_nodes[r][c].info());

    std::map<std::string, std::deque<ScheduledMessage>> queues;
    for (const auto& m : messages) queues[m.sender].push_back(m);

    std::map<std::string, Rng> sender_rngs;
    for (const auto& s : sender_ids)
        sender_rngs.emplace(s, Rng::derive_from(seed, "mix-sender:" + s));

    // incoming[id] fills during a tick and is processed at the next one.
    std::map<std::string, std::vector<OnionPacket>> incoming;
    std::map<std::string, MixNode*> node_by_id;
    std::map<std::string, Endpoint*> receiver_by_id;
    for (auto& row : matrix_nodes)
        for (auto& node : row) node_by_id[node.id()] = &node;
    for (auto& r : receivers) receiver_by_id[r.id] = &r;

    TrafficTranscript transcript;
    auto record_links = [&](std::size_t tick,
                            const std::map<std::pair<std::string, std::string>, std::size_t>& links) {
        for (const auto& [link, count] : links) {
            transcript.lines.push_back("tick=" + std::to_string(tick) + " link=" + link.first +
                                       "->" + link.second +
                                       " blocks=" + std::to_string(count));
            transcript.link_totals[link] += count;
        }
    };

    std::size_t total_ticks = ticks + cols + 1; // drain the pipeline
    for (std::size_t tick = 1; tick <= total_ticks; ++tick) {
        std::map<std::pair<std::string, std::string>, std::size_t> links;
        std::vector<std::string> deliver_lines;

        // Arrivals from the previous tick enter node batches / receivers.
        std::map<std::string, std::vector<OnionPacket>> arrived;
        arrived.swap(incoming);
        for (auto& [id, packets] : arrived) {
            if (auto it = node_by_id.find(id); it != node_by_id.end()) {
                for (auto& p : packets) it->second->submit(p);
            } else if (auto rit = receiver_by_id.find(id); rit != receiver_by_id.end()) {
                for (auto& p : packets) {
                    try {
                        PeelResult r = peel(rit->second->keys, id, p);
                        if (r.kind == PeelResult::Kind::Deliver) {
                            Bytes payload = detail::unpad_traffic_payload(r.payload);
                            transcript.deliveries.push_back({tick, id, payload});
                            deliver_lines.push_back(
                                "deliver to=" + id + " payload_digest=" +
                                to_hex(crypto::digest_bytes(crypto::sha256(payload))));
                        }
                        // Dummies vanish without a trace.
                    } catch (const Error&) {
                        // Undecryptable blocks are dropped silently too.
                    }
                }
            }
        }

        // Senders emit `rate` slots while the send phase lasts.
        if (tick <= ticks) {
            for (const auto& sender : sender_ids) {
                Rng& rng = sender_rngs.at(sender);
                for (std::size_t slot = 0; slot < rate; ++slot) {
                    std::vector<MixKeyInfo> path = choose_path(matrix, rng);
                    std::size_t ridx = static_cast<std::size_t>(rng.below(receivers.size()));
                    const Endpoint& dest = receivers[ridx];
                    // Drawn unconditionally so the stream position never
                    // depends on what traffic is queued.
                    Bytes filler = rng.bytes(kTrafficPayloadSize);

                    auto& queue = queues[sender];
                    bool real = !queue.empty() && queue.front().tick <= tick &&
                                queue.front().receiver == dest.id;
                    OnionPacket packet;
                    if (real) {
                        packet = build_onion(path, dest.info(),
                                             detail::pad_traffic_payload(queue.front().payload),
                                             rng, PacketKind::Real);
                        queue.pop_front();
                    } else {
                        packet = build_onion(path, dest.info(), filler, rng,
                                             PacketKind::Dummy);
                    }
                    ++links[{sender, path[0].id}];
                    incoming[path[0].id].push_back(std::move(packet));
                }
            }
        }

        // Every node flushes its batch; outputs travel one hop.
        for (std::size_t c = 0; c < cols; ++c) {
            for (std::size_t r = 0; r < rows; ++r) {
                MixNode& node = matrix_nodes[r][c];
                for (PeelResult& res : node.flush()) {
                    if (res.kind != PeelResult::Kind::Forward) continue;
                    ++links[{node.id(), res.next_hop}];
                    incoming[res.next_hop].push_back(std::move(res.packet));
                }
            }
        }

        record_links(tick, links);
        for (auto& l : deliver_lines) transcript.lines.push_back(std::move(l));
    }
    return transcript;
}

} // namespace paysec::mixnet
