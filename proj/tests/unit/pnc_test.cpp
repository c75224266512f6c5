// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#include <gtest/gtest.h>

#include <set>

#include "pncsim/pnc/authorization.hpp"

using namespace pncsim;
using namespace pncsim::pnc;
using pki::Role;

namespace {

constexpr std::int64_t kEpoch = 1767225600;
constexpr std::int64_t kYear = 365 * 24 * 3600;
const pki::Validity kValid{kEpoch - kYear, kEpoch + kYear};

struct Fixture {
  DeterministicRng rng{41};
  pki::Authority mo_root = pki::generate_authority("MO-Root", Role::Root, nullptr, kValid, rng);
  pki::Authority mo_sub = pki::generate_authority("MO-Sub", Role::IntermediateCA, &mo_root, kValid, rng);
  pki::Credential victim = pki::issue_leaf(mo_sub, "DE-VIC-000001", Role::ContractLeaf, kValid, std::nullopt, rng);
  pki::Credential attacker =
      pki::issue_leaf(mo_sub, "DE-ATK-000002", Role::ContractLeaf, kValid, std::nullopt, rng);
  SessionId session{1, 2, 3, 4, 5, 6, 7, 8};

  VerifierContext context(AuthorizationPolicy policy = {}, std::string station = "DE*ICE*E001") {
    VerifierContext c;
    c.trust_roots = {mo_root.certificate};
    c.now_seconds = kEpoch;
    c.policy = policy;
    c.station_id = std::move(station);
    return c;
  }

  AuthorizationDecision verify(const pki::Credential& cred, const Challenge& ch, const pki::Signature& sig,
                               const VerifierContext& ctx, Nanos latency = 2 * kMillisecond) {
    return verify_authorization(cred.certificate, cred.chain, ch, ch, sig, ctx, ch.issued_at,
                                ch.issued_at + latency);
  }
};

const AuthorizationPolicy kBound{Binding::StationIdBound, std::nullopt};

}  // namespace

TEST(Challenge, LengthAndDeterminism) {
  DeterministicRng a(5), b(5);
  SessionId s{};
  for (int i = 0; i < 100; ++i) {
    auto x = generate_challenge(a, s, i);
    auto y = generate_challenge(b, s, i);
    EXPECT_EQ(x, y);
    EXPECT_EQ(x.bytes.size(), 16u);
    EXPECT_EQ(x.issued_at, i);
  }
}

TEST(Challenge, NoCollisionsOverTenThousandDraws) {
  DeterministicRng rng(6);
  std::set<ChallengeBytes> seen;
  for (int i = 0; i < 10'000; ++i) ASSERT_TRUE(seen.insert(generate_challenge(rng, {}, 0).bytes).second);
}

TEST(Signing, DigestDomainSeparation) {
  ChallengeBytes c{};
  c.fill(0x42);
  Bytes bound(c.begin(), c.end());
  bound.push_back(0x1F);
  auto id = to_bytes("DE*ICE*E001");
  bound.insert(bound.end(), id.begin(), id.end());
  EXPECT_EQ(signing_digest(c, "DE*ICE*E001"), pki::sha256(bound));
  EXPECT_EQ(signing_digest(c, std::nullopt), pki::sha256(c));
  EXPECT_NE(signing_digest(c, ""), signing_digest(c, std::nullopt));
}

TEST(Authorization, UnboundRoundTrip) {
  Fixture f;
  auto ch = generate_challenge(f.rng, f.session, 0);
  auto d = f.verify(f.victim, ch, sign_challenge(f.victim, ch, std::nullopt), f.context());
  EXPECT_TRUE(d.accepted()) << d.describe();
}

TEST(Authorization, UnboundSignatureUnderBindingPolicy) {
  Fixture f;
  auto ch = generate_challenge(f.rng, f.session, 0);
  auto d = f.verify(f.victim, ch, sign_challenge(f.victim, ch, std::nullopt), f.context(kBound));
  EXPECT_EQ(d.code, AuthorizationCode::BindingMismatch);
}

TEST(Authorization, BoundToOtherStation) {
  Fixture f;
  auto ch = generate_challenge(f.rng, f.session, 0);
  auto sig = sign_challenge(f.victim, ch, "DE*ICE*E002");
  EXPECT_EQ(f.verify(f.victim, ch, sig, f.context(kBound, "DE*ICE*E001")).code, AuthorizationCode::BindingMismatch);
  EXPECT_TRUE(f.verify(f.victim, ch, sig, f.context(kBound, "DE*ICE*E002")).accepted());
}

TEST(Authorization, WrongKeyIsBadSignature) {
  Fixture f;
  auto ch = generate_challenge(f.rng, f.session, 0);
  auto sig = sign_challenge(f.attacker, ch, std::nullopt);
  EXPECT_EQ(f.verify(f.victim, ch, sig, f.context()).code, AuthorizationCode::BadSignature);
}

TEST(Authorization, ChallengeMismatchComesFirst) {
  Fixture f;
  auto issued = generate_challenge(f.rng, f.session, 0);
  auto other = issued;
  other.session_id[0] ^= 1;
  auto d = verify_authorization(f.victim.certificate, f.victim.chain, issued, other, pki::Signature{},
                                f.context(), 0, 0);
  EXPECT_EQ(d.code, AuthorizationCode::ChallengeMismatch);
}

TEST(Authorization, ChainCheckedBeforeSignature) {
  Fixture f;
  auto ch = generate_challenge(f.rng, f.session, 0);
  auto ctx = f.context();
  ctx.crl = pki::RevocationList{"MO-Sub", {"DE-VIC-000001"}, kEpoch};
  auto d = f.verify(f.victim, ch, pki::Signature{}, ctx);
  EXPECT_EQ(d.code, AuthorizationCode::ChainInvalid);
  EXPECT_EQ(d.chain.error, pki::ChainError::Revoked);
  auto foreign = f.context();
  foreign.trust_roots.clear();
  EXPECT_EQ(f.verify(f.victim, ch, sign_challenge(f.victim, ch, std::nullopt), foreign).code,
            AuthorizationCode::ChainInvalid);
}

TEST(Authorization, SignatureCheckedBeforeTiming) {
  Fixture f;
  auto ch = generate_challenge(f.rng, f.session, 0);
  auto ctx = f.context(AuthorizationPolicy{Binding::None, 200 * kMillisecond});
  auto d = f.verify(f.victim, ch, pki::Signature{}, ctx, 5 * kSecond);
  EXPECT_EQ(d.code, AuthorizationCode::BadSignature);
}

TEST(Authorization, TimingGuardBoundary) {
  Fixture f;
  auto ch = generate_challenge(f.rng, f.session, 0);
  auto sig = sign_challenge(f.victim, ch, std::nullopt);
  auto ctx = f.context(AuthorizationPolicy{Binding::None, 200 * kMillisecond});
  EXPECT_TRUE(f.verify(f.victim, ch, sig, ctx, 200 * kMillisecond).accepted());
  auto late = f.verify(f.victim, ch, sig, ctx, 200 * kMillisecond + 1);
  EXPECT_EQ(late.code, AuthorizationCode::TimingExceeded);
  EXPECT_EQ(late.measured_latency, 200 * kMillisecond + 1);
  EXPECT_EQ(f.verify(f.victim, ch, sig, ctx, 1000 * kMillisecond).code, AuthorizationCode::TimingExceeded);
}

TEST(AuthorizationProperties, SignVerifyThousandChallengesWithMutations) {
  Fixture f;
  auto ctx = f.context();
  for (int i = 0; i < 1000; ++i) {
    auto ch = generate_challenge(f.rng, f.session, i);
    auto sig = sign_challenge(f.victim, ch, std::nullopt);
    ASSERT_TRUE(f.verify(f.victim, ch, sig, ctx).accepted());

    auto mutated_sig = sig;
    mutated_sig[f.rng.next() % 64] ^= static_cast<std::uint8_t>(1 + f.rng.next() % 255);
    ASSERT_FALSE(f.verify(f.victim, ch, mutated_sig, ctx).accepted());

    auto mutated_ch = ch;
    mutated_ch.bytes[f.rng.next() % 16] ^= static_cast<std::uint8_t>(1 + f.rng.next() % 255);
    ASSERT_EQ(f.verify(f.victim, mutated_ch, sig, ctx).code, AuthorizationCode::BadSignature);
  }
}

TEST(AuthorizationProperties, CrossSessionReplayRejected) {
  Fixture f;
  auto ctx = f.context();
  for (int i = 0; i < 300; ++i) {
    SessionId s1 = f.rng.bytes<8>();
    SessionId s2 = f.rng.bytes<8>();
    auto c1 = generate_challenge(f.rng, s1, 0);
    auto c2 = generate_challenge(f.rng, s2, 0);
    auto sig = sign_challenge(f.victim, c1, std::nullopt);
    ASSERT_TRUE(f.verify(f.victim, c1, sig, ctx).accepted());
    auto replay = f.verify(f.victim, c2, sig, ctx);
    ASSERT_TRUE(replay.code == AuthorizationCode::BadSignature ||
                replay.code == AuthorizationCode::ChallengeMismatch);
    auto presented = verify_authorization(f.victim.certificate, f.victim.chain, c2, c1, sig, ctx, 0, 0);
    ASSERT_EQ(presented.code, AuthorizationCode::ChallengeMismatch);
  }
}

TEST(AuthorizationProperties, BindingSoundness) {
  Fixture f;
  for (int i = 0; i < 300; ++i) {
    std::string id1 = "DE*ICE*E" + std::to_string(f.rng.next() % 1000);
    std::string id2 = "DE*ICE*E" + std::to_string(f.rng.next() % 1000);
    if (id1 == id2) continue;
    auto ch = generate_challenge(f.rng, f.session, 0);
    auto sig = sign_challenge(f.victim, ch, id1);
    ASSERT_EQ(f.verify(f.victim, ch, sig, f.context(kBound, id2)).code, AuthorizationCode::BindingMismatch);
    ASSERT_TRUE(f.verify(f.victim, ch, sig, f.context(kBound, id1)).accepted());
  }
}

TEST(AuthorizationProperties, BaselineIndependentOfSigner) {
  // A signature produced at the victim and carried over a relay is the same
  // byte string as one produced locally, so the verdict cannot differ.
  Fixture f;
  auto ctx = f.context();
  for (int i = 0; i < 200; ++i) {
    auto ch = generate_challenge(f.rng, f.session, i);
    auto local = sign_challenge(f.victim, ch, std::nullopt);
    pki::Signature relayed;
    Bytes carried(local.begin(), local.end());
    std::copy(carried.begin(), carried.end(), relayed.begin());
    auto a = f.verify(f.victim, ch, local, ctx, 2 * kMillisecond);
    auto b = f.verify(f.victim, ch, relayed, ctx, 1500 * kMillisecond);
    ASSERT_EQ(a.code, b.code);
    ASSERT_TRUE(a.accepted());
  }
}

TEST(AuthorizationProperties, TimingMonotone) {
  Fixture f;
  auto ctx = f.context(AuthorizationPolicy{Binding::None, 200 * kMillisecond});
  auto ch = generate_challenge(f.rng, f.session, 0);
  auto sig = sign_challenge(f.victim, ch, std::nullopt);
  for (int i = 0; i < 500; ++i) {
    Nanos l = static_cast<Nanos>(f.rng.next() % (400 * kMillisecond));
    Nanos smaller = static_cast<Nanos>(f.rng.next() % (l + 1));
    if (f.verify(f.victim, ch, sig, ctx, l).accepted()) {
      ASSERT_TRUE(f.verify(f.victim, ch, sig, ctx, smaller).accepted());
    }
  }
}
