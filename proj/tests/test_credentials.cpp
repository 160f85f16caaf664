#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "cpx/credentials.hpp"
#include "cpx/errors.hpp"
#include "cpx/rng.hpp"
#include "support/oracles.hpp"

using namespace cpx;

namespace {

struct IssuerRig {
  const GroupParams& params;
  Registry registry;
  SeededRng rng{4242};
  KeyPair keys;
  Did did;

  explicit IssuerRig(const GroupParams& p = GroupParams::toy())
      : params(p), registry(params) {
    keys = keygen(params, rng);
    DidDocument doc{did_from_pk(params, keys.pk), keys.pk, "General Medical Council",
                    "inbox-gmc"};
    registry.publish_did(
        doc, sign(params, keys.sk, did_document_signing_bytes(params, doc), rng));
    did = doc.did;
    CredentialSchema license{"gmc_license:1",
                             {"full_name", "gmc_number", "license_status"}};
    registry.publish_schema(
        license, did,
        sign(params, keys.sk, schema_signing_bytes(params, license, did), rng));
  }

  std::map<std::string, std::string> license_values() const {
    return {{"full_name", "Dr. Alex Doe"},
            {"gmc_number", "7654321"},
            {"license_status", "active"}};
  }
};

}  // namespace

TEST_CASE("offers preview the full schema and carry a fresh nonce") {
  IssuerRig rig;
  CredentialOffer offer =
      make_offer(rig.registry, rig.did, "gmc_license:1", rig.license_values(), rig.rng);
  CHECK(offer.schema_id == "gmc_license:1");
  CHECK(offer.issuer_did == rig.did);
  CHECK(offer.offer_nonce.size() == 16);
  CHECK(offer.attribute_preview == rig.license_values());

  CredentialOffer offer2 =
      make_offer(rig.registry, rig.did, "gmc_license:1", rig.license_values(), rig.rng);
  CHECK(offer2.offer_nonce != offer.offer_nonce);

  auto missing = rig.license_values();
  missing.erase("gmc_number");
  try {
    (void)make_offer(rig.registry, rig.did, "gmc_license:1", missing, rig.rng);
    FAIL("offer missing an attribute was accepted");
  } catch (const ProtocolError& e) {
    CHECK(e.code() == ErrorCode::MissingAttribute);
  }

  try {
    (void)make_offer(rig.registry, rig.did, "never_published:9",
                     rig.license_values(), rig.rng);
    FAIL("offer against unpublished schema was accepted");
  } catch (const ProtocolError& e) {
    CHECK(e.code() == ErrorCode::UnknownSchema);
  }

  auto extra = rig.license_values();
  extra["shoe_size"] = "42";
  CHECK_THROWS_AS(
      (void)make_offer(rig.registry, rig.did, "gmc_license:1", extra, rig.rng),
      ProtocolError);
}

TEST_CASE("happy-path issuance: blind request, signed body, holder acceptance") {
  IssuerRig rig;
  SeededRng holder_rng(7);
  LinkSecret secret = LinkSecret::generate(rig.params, holder_rng);

  CredentialOffer offer =
      make_offer(rig.registry, rig.did, "gmc_license:1", rig.license_values(), rig.rng);
  mpz_class blinding;
  CredentialRequest req =
      make_request(rig.params, secret, offer, holder_rng, &blinding);
  CHECK(req.link_commitment == commit(rig.params, secret.s, blinding));

  IssuedCredential cred =
      issue_credential(rig.params, rig.registry, rig.did, rig.keys.sk, offer, req,
                       "2020-07-01T09:00:00Z", rig.rng);
  CHECK(cred.body.schema_id == "gmc_license:1");
  CHECK(cred.body.issuer_did == rig.did);
  CHECK(cred.body.issued_at == "2020-07-01T09:00:00Z");
  CHECK(cred.body.credential_id.size() == 32);  // 16 bytes, hex
  CHECK(cred.body.digests.size() == 3);         // one per schema attribute
  CHECK(cred.body.link_commitment == req.link_commitment);
  CHECK(cred.values == rig.license_values());

  // the signed body carries digests only — no attribute plaintext
  std::string body_dump = body_to_json(rig.params, cred.body).dump();
  CHECK(body_dump.find("Alex Doe") == std::string::npos);
  CHECK(body_dump.find("7654321") == std::string::npos);

  CHECK(verify_sig(rig.params, rig.keys.pk,
                   credential_body_signing_bytes(rig.params, cred.body),
                   cred.signature));
  CHECK(check_issued_credential(rig.params, rig.registry, cred, offer,
                                req.link_commitment) == std::nullopt);
}

TEST_CASE("requests bind to one offer nonce") {
  IssuerRig rig;
  SeededRng holder_rng(8);
  LinkSecret secret = LinkSecret::generate(rig.params, holder_rng);
  CredentialOffer offer_a =
      make_offer(rig.registry, rig.did, "gmc_license:1", rig.license_values(), rig.rng);
  CredentialOffer offer_b =
      make_offer(rig.registry, rig.did, "gmc_license:1", rig.license_values(), rig.rng);

  mpz_class blinding;
  CredentialRequest req =
      make_request(rig.params, secret, offer_a, holder_rng, &blinding);

  // replay the request against a different offer
  try {
    (void)issue_credential(rig.params, rig.registry, rig.did, rig.keys.sk, offer_b,
                           req, "2020-07-01T09:00:00Z", rig.rng);
    FAIL("request replayed across offers was accepted");
  } catch (const ProtocolError& e) {
    CHECK(e.code() == ErrorCode::ProofBindingMismatch);
  }

  // outright corrupt proof
  CredentialRequest bad = req;
  bad.opening_proof.responses[0] =
      (bad.opening_proof.responses[0] + 1) % rig.params.q();
  try {
    (void)issue_credential(rig.params, rig.registry, rig.did, rig.keys.sk, offer_a,
                           bad, "2020-07-01T09:00:00Z", rig.rng);
    FAIL("corrupt request proof was accepted");
  } catch (const ProtocolError& e) {
    CHECK(e.code() == ErrorCode::BadRequestProof);
  }
}

TEST_CASE("the issuer transcript is perfectly hiding in the toy group") {
  IssuerRig rig;
  SeededRng holder_rng(9);
  LinkSecret secret = LinkSecret::generate(rig.params, holder_rng);
  CredentialOffer offer =
      make_offer(rig.registry, rig.did, "gmc_license:1", rig.license_values(), rig.rng);
  mpz_class blinding;
  CredentialRequest req =
      make_request(rig.params, secret, offer, holder_rng, &blinding);

  // everything the issuer sees of the link secret is the commitment; every
  // candidate secret in [0, q) admits exactly one opening, so brute force
  // over the whole group narrows nothing down
  auto openings = oracle::enumerate_openings(
      oracle::to_u32(rig.params.h()), oracle::to_u32(req.link_commitment));
  std::set<std::uint32_t> candidates;
  for (auto& [s, r] : openings) candidates.insert(s);
  CHECK(candidates.size() == oracle::kQ);
}

TEST_CASE("holder refusal reasons identify exactly what went wrong") {
  IssuerRig rig;
  SeededRng holder_rng(10);
  LinkSecret secret = LinkSecret::generate(rig.params, holder_rng);
  CredentialOffer offer =
      make_offer(rig.registry, rig.did, "gmc_license:1", rig.license_values(), rig.rng);
  mpz_class blinding;
  CredentialRequest req =
      make_request(rig.params, secret, offer, holder_rng, &blinding);
  IssuedCredential good =
      issue_credential(rig.params, rig.registry, rig.did, rig.keys.sk, offer, req,
                       "2020-07-01T09:00:00Z", rig.rng);

  // issuer spells the name wrong relative to the approved preview
  CredentialOffer misspelled = offer;
  misspelled.attribute_preview["full_name"] = "Dr. Alexx Doe";
  IssuedCredential wrong_name =
      issue_credential(rig.params, rig.registry, rig.did, rig.keys.sk, misspelled,
                       req, "2020-07-01T09:00:00Z", rig.rng);
  CHECK(check_issued_credential(rig.params, rig.registry, wrong_name, offer,
                                req.link_commitment) == "ValueMismatch");

  // body tampered after signing
  IssuedCredential tampered = good;
  tampered.body.digests[1][0] ^= 0x01;
  CHECK(check_issued_credential(rig.params, rig.registry, tampered, offer,
                                req.link_commitment) == "BadIssuerSignature");

  // wrong link commitment
  CHECK(check_issued_credential(rig.params, rig.registry, good, offer,
                                commit(rig.params, 1, 2)) == "ForeignCommitment");

  // schema swap
  IssuedCredential other_schema = good;
  other_schema.body.schema_id = "unknown:1";
  CHECK(check_issued_credential(rig.params, rig.registry, other_schema, offer,
                                req.link_commitment) == "SchemaMismatch");

  // issuer swapped relative to the approved offer: flagged as a mismatch
  // against what the holder agreed to, before any registry lookup
  IssuedCredential foreign = good;
  foreign.body.issuer_did = "did:cpx:ghost";
  CHECK(check_issued_credential(rig.params, rig.registry, foreign, offer,
                                req.link_commitment) == "SchemaMismatch");

  // offer and credential agree on a DID that nobody anchored
  CredentialOffer ghost_offer = offer;
  ghost_offer.issuer_did = "did:cpx:ghost";
  CHECK(check_issued_credential(rig.params, rig.registry, foreign, ghost_offer,
                                req.link_commitment) == "UnknownIssuer");

  // a salt that no longer opens its digest
  IssuedCredential bad_salt = good;
  bad_salt.salts["gmc_number"][0] ^= 0x01;
  CHECK(check_issued_credential(rig.params, rig.registry, bad_salt, offer,
                                req.link_commitment) == "DigestMismatch");

  CHECK(check_issued_credential(rig.params, rig.registry, good, offer,
                                req.link_commitment) == std::nullopt);
}

TEST_CASE("a thousand single-byte mutations of the signed body all fail") {
  // Production group: with a 256-bit challenge space a mutated body cannot
  // re-verify by chance.  (In the toy group roughly 1/101 of mutations would
  // re-verify via challenge collision, which is exactly why it is a toy.)
  IssuerRig rig(GroupParams::production());
  SeededRng holder_rng(11);
  LinkSecret secret = LinkSecret::generate(rig.params, holder_rng);
  CredentialOffer offer =
      make_offer(rig.registry, rig.did, "gmc_license:1", rig.license_values(), rig.rng);
  mpz_class blinding;
  CredentialRequest req =
      make_request(rig.params, secret, offer, holder_rng, &blinding);
  IssuedCredential cred =
      issue_credential(rig.params, rig.registry, rig.did, rig.keys.sk, offer, req,
                       "2020-07-01T09:00:00Z", rig.rng);

  Bytes canon = credential_body_signing_bytes(rig.params, cred.body);
  SeededRng fuzz(31415);
  int accepted = 0;
  for (int i = 0; i < 1000; ++i) {
    Bytes mutated = canon;
    std::size_t pos = fuzz.next_u64() % mutated.size();
    std::uint8_t bit = static_cast<std::uint8_t>(1u << (fuzz.next_u64() % 8));
    mutated[pos] ^= bit;
    if (verify_sig(rig.params, rig.keys.pk, mutated, cred.signature)) ++accepted;
  }
  CHECK(accepted == 0);
  CHECK(verify_sig(rig.params, rig.keys.pk, canon, cred.signature));
}

TEST_CASE("credential json round-trips preserve verification") {
  IssuerRig rig;
  SeededRng holder_rng(12);
  LinkSecret secret = LinkSecret::generate(rig.params, holder_rng);
  CredentialOffer offer =
      make_offer(rig.registry, rig.did, "gmc_license:1", rig.license_values(), rig.rng);

  CredentialOffer offer2 = offer_from_json(offer_to_json(offer));
  CHECK(offer2.offer_nonce == offer.offer_nonce);
  CHECK(offer2.attribute_preview == offer.attribute_preview);

  mpz_class blinding;
  CredentialRequest req =
      make_request(rig.params, secret, offer, holder_rng, &blinding);
  CredentialRequest req2 =
      request_from_json(rig.params, request_to_json(rig.params, req));
  CHECK(req2.link_commitment == req.link_commitment);

  IssuedCredential cred =
      issue_credential(rig.params, rig.registry, rig.did, rig.keys.sk, offer, req2,
                       "2020-07-01T09:00:00Z", rig.rng);
  IssuedCredential cred2 =
      issued_from_json(rig.params, issued_to_json(rig.params, cred));
  CHECK(cred2.body.credential_id == cred.body.credential_id);
  CHECK(cred2.values == cred.values);
  CHECK(check_issued_credential(rig.params, rig.registry, cred2, offer,
                                req.link_commitment) == std::nullopt);
  CHECK(issued_to_json(rig.params, cred2).dump() ==
        issued_to_json(rig.params, cred).dump());
}
