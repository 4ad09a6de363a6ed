#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tdo/digest.hpp"
#include "tdo/model.hpp"

namespace tdo {

// DEVM/1: a deterministic 64-bit stack machine. Every observable behavior is
// fixed by this module's normative self-description document; there is no
// ambient input of any kind.

struct VmProgram {
    std::uint64_t entry = 0;
    std::vector<std::uint8_t> code;

    bool operator==(const VmProgram&) const = default;
};

// Binary container: "DEVM/1\n", entry (u64 LE), code length (u64 LE), code.
// load_program validates the magic, that the code decodes as one contiguous
// instruction sequence, and that entry and every static jump or call target
// land on an instruction boundary.
std::vector<std::uint8_t> program_bytes(const VmProgram& program);
VmProgram load_program(std::span<const std::uint8_t> bytes);

struct TimedEvent {
    std::uint64_t t = 0;
    std::string channel;
    std::vector<std::uint8_t> payload;

    bool operator==(const TimedEvent&) const = default;
};

enum class HaltKind { normal, fuel_exhausted, trap };

std::string_view to_string(HaltKind k);

struct ExecutionResult {
    std::vector<std::uint8_t> output;
    std::vector<TimedEvent> events;
    HaltKind halted = HaltKind::trap;
    std::uint64_t instructions_executed = 0;
    std::uint64_t trap_offset = 0; // meaningful only when halted == trap
    std::string trap_reason;       // empty unless halted == trap

    bool operator==(const ExecutionResult&) const = default;
};

// Runs the program to completion, fuel exhaustion, or trap. Identical inputs
// yield identical results on every platform. Throws VmError only for fuel == 0
// (precondition); all runtime failures are trap results.
ExecutionResult execute(const VmProgram& program, std::span<const std::uint8_t> input,
                        std::uint64_t fuel);

// Assembly text <-> program. assemble throws AssemblyError with a line number;
// disassemble output re-assembles to the identical program.
VmProgram assemble(std::string_view source);
std::string disassemble(const VmProgram& program);

// Runs the decoder named by blob.decoder_ref over blob.bytes. The decoder is
// looked up among the object's vm-program blobs, then inside nested
// predecessor objects. Throws VmError for a missing decoder or an abnormal
// halt, StructuralError when the blob is not vm-encoded.
std::vector<std::uint8_t> decode_content(const ContentBlob& blob,
                                         const TrustworthyDigitalObject& tdo, std::uint64_t fuel);

// The normative DEVM/1 specification document, byte-identical across builds.
// Its digest is the value stored as vm_spec_ref by every object that carries
// VM-dependent content.
const std::vector<std::uint8_t>& vm_self_description();
const Digest& vm_spec_digest();

// Returns the unique constant c with b[i].t == a[i].t + c and identical
// channels and payloads in order; absent when none exists. The empty pair
// yields 0.
std::optional<std::int64_t> replay_equivalent(const std::vector<TimedEvent>& a,
                                              const std::vector<TimedEvent>& b);

// Event log text: one event per line, "<t> <channel> <payload-hex>", newline
// terminated. Channels are 1..32 bytes of printable ASCII without spaces, so
// the format is unambiguous.
std::string events_to_text(const std::vector<TimedEvent>& events);
std::vector<TimedEvent> events_from_text(std::string_view text);

} // namespace tdo
