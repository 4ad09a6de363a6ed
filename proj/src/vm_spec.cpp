#include <string>
#include <vector>

#include "tdo/canonical.hpp"
#include "tdo/markup.hpp"
#include "tdo/vm.hpp"

namespace tdo {

namespace {

Node rule(const char* name, const char* text) {
    Node n{"rule"};
    n.set_attr("name", name);
    n.set_text(text);
    return n;
}

Node op(const char* code, const char* mnemonic, const char* operand, const char* text) {
    Node n{"op"};
    n.set_attr("code", code);
    n.set_attr("mnemonic", mnemonic);
    n.set_attr("operand", operand);
    n.set_text(text);
    return n;
}

Node trap(const char* name, const char* text) {
    Node n{"trap"};
    n.set_attr("name", name);
    n.set_text(text);
    return n;
}

Node build_spec() {
    Node root{"vm-spec"};
    root.set_attr("format", "DEVM/1");

    Node machine{"machine"};
    machine.add_child(rule("word",
        "Values are unsigned 64-bit integers. Arithmetic wraps modulo 2^64."));
    machine.add_child(rule("stack",
        "The operand stack holds at most 65536 values. Pushing past the limit traps "
        "stack_overflow; popping an empty stack traps stack_underflow."));
    machine.add_child(rule("memory",
        "Memory is byte-addressable, initially empty, zero-filled as it grows, and limited "
        "to 16777216 bytes. Any access at or beyond the limit traps memory_bounds. A read "
        "below the limit of a byte never written yields 0."));
    machine.add_child(rule("fuel",
        "Every executed instruction consumes exactly 1 unit of fuel. When the budget is "
        "spent before the next instruction, the machine stops with the fuel-exhausted "
        "halt kind; a HALT instruction stops it with the normal kind."));
    machine.add_child(rule("entry",
        "Execution begins at the entry offset recorded in the program container."));
    machine.add_child(rule("end",
        "Advancing past the final code byte without a jump traps end_of_code."));
    machine.add_child(rule("determinism",
        "The machine has no clock, no randomness, and no access to its host environment. "
        "Output, events, halt kind, and instruction count are a pure function of the "
        "program bytes, the input bytes, and the fuel budget."));
    root.add_child(std::move(machine));

    Node container{"container"};
    container.set_text(
        "A program file begins with the 7 bytes: DEVM/1 followed by one newline (0x0a). "
        "Next is the entry offset as an unsigned 64-bit little-endian integer, then the "
        "code length in the same form, then exactly that many code bytes and nothing "
        "else. An instruction is one opcode byte; PUSH, JMP, JZ, and CALL carry an 8-byte "
        "little-endian immediate directly after the opcode. Loading fails unless the code "
        "decodes as one contiguous instruction sequence starting at offset 0 and the "
        "entry offset and every JMP, JZ, and CALL immediate land on an instruction "
        "boundary.");
    root.add_child(std::move(container));

    Node instructions{"instructions"};
    instructions.add_child(op("00", "HALT", "none",
        "Stop with the normal halt kind."));
    instructions.add_child(op("01", "PUSH", "imm64",
        "Push the immediate value."));
    instructions.add_child(op("02", "POP", "none",
        "Discard the top value."));
    instructions.add_child(op("03", "DUP", "none",
        "Pop v, then push v twice."));
    instructions.add_child(op("04", "SWAP", "none",
        "Pop a, pop b, push a, push b."));
    instructions.add_child(op("05", "PICK", "none",
        "Pop k. Trap pick_out_of_range unless k is below the remaining stack depth. Push "
        "a copy of the value k places down from the top, where k=0 names the top."));
    instructions.add_child(op("10", "ADD", "none",
        "Pop y, pop x, push x plus y."));
    instructions.add_child(op("11", "SUB", "none",
        "Pop y, pop x, push x minus y."));
    instructions.add_child(op("12", "MUL", "none",
        "Pop y, pop x, push x times y."));
    instructions.add_child(op("13", "DIVMOD", "none",
        "Pop the divisor, pop the dividend. Trap division_by_zero when the divisor is 0. "
        "Push the quotient, then push the remainder, leaving the remainder on top."));
    instructions.add_child(op("14", "AND", "none",
        "Pop y, pop x, push the bitwise and."));
    instructions.add_child(op("15", "OR", "none",
        "Pop y, pop x, push the bitwise or."));
    instructions.add_child(op("16", "XOR", "none",
        "Pop y, pop x, push the bitwise exclusive or."));
    instructions.add_child(op("17", "NOT", "none",
        "Pop x, push its bitwise complement."));
    instructions.add_child(op("18", "SHL", "none",
        "Pop y, pop x. Push x shifted left by y bits, or 0 when y is 64 or more."));
    instructions.add_child(op("19", "SHR", "none",
        "Pop y, pop x. Push x shifted right by y bits filling with zeros, or 0 when y is "
        "64 or more."));
    instructions.add_child(op("1a", "CMP", "none",
        "Pop y, pop x. Push 0 when x equals y, 1 when x is greater, and 2^64-1 when x is "
        "less."));
    instructions.add_child(op("20", "JMP", "target64",
        "Set the program counter to the immediate target."));
    instructions.add_child(op("21", "JZ", "target64",
        "Pop c. Jump to the immediate target when c is 0, otherwise fall through."));
    instructions.add_child(op("22", "CALL", "target64",
        "Push the offset of the next instruction, then jump to the immediate target."));
    instructions.add_child(op("23", "RET", "none",
        "Pop an offset. Trap bad_return_address unless it is an instruction boundary. "
        "Set the program counter to it."));
    instructions.add_child(op("30", "LOAD8", "none",
        "Pop an address and push the byte stored there."));
    instructions.add_child(op("31", "LOAD64", "none",
        "Pop an address. Trap memory_bounds unless address plus 8 is within the memory "
        "limit. Push the little-endian 64-bit value stored there."));
    instructions.add_child(op("32", "STORE8", "none",
        "Pop an address, then pop a value. Store the value's low byte at the address."));
    instructions.add_child(op("33", "STORE64", "none",
        "Pop an address, then pop a value. Trap memory_bounds unless address plus 8 is "
        "within the memory limit. Store the value as 8 little-endian bytes."));
    instructions.add_child(op("40", "INSIZE", "none",
        "Push the input length in bytes."));
    instructions.add_child(op("41", "INREAD", "none",
        "Pop an offset. Trap input_bounds at or beyond the input length. Push the input "
        "byte at that offset."));
    instructions.add_child(op("42", "OUTB", "none",
        "Pop a value and append its low byte to the output."));
    instructions.add_child(op("43", "EMIT", "none",
        "Pop the payload length, the payload address, the channel length, the channel "
        "address, and the tick t, in that order. Trap bad_event_channel unless the "
        "channel is 1 to 32 bytes long and every channel byte is in 0x21 to 0x7e. Trap "
        "memory_bounds for any address range fault. Trap event_time_regression when t is "
        "below the previous event's tick in this execution. Otherwise record the event "
        "with channel and payload bytes read from memory."));
    root.add_child(std::move(instructions));

    Node traps{"traps"};
    traps.add_child(trap("stack_underflow", "A pop found the operand stack empty."));
    traps.add_child(trap("stack_overflow", "A push would exceed 65536 stack values."));
    traps.add_child(trap("pick_out_of_range", "PICK asked for a value below the stack."));
    traps.add_child(trap("division_by_zero", "DIVMOD popped a zero divisor."));
    traps.add_child(trap("memory_bounds", "A memory access reached the 16777216-byte limit."));
    traps.add_child(trap("input_bounds", "INREAD asked for an offset past the input."));
    traps.add_child(trap("bad_return_address",
        "RET popped an offset that is not an instruction boundary."));
    traps.add_child(trap("bad_event_channel",
        "EMIT found an empty, overlong, or non-printable channel."));
    traps.add_child(trap("event_time_regression",
        "EMIT saw a tick below the previous event's tick."));
    traps.add_child(trap("end_of_code", "The program counter ran past the final code byte."));
    Node trap_note{"note"};
    trap_note.set_text(
        "A trap stops execution at once. The result records the offset of the trapping "
        "instruction and the trap name; output and events produced before the trap are "
        "kept.");
    traps.add_child(std::move(trap_note));
    root.add_child(std::move(traps));

    Node events{"events"};
    events.set_text(
        "EMIT records timed events. Ticks are abstract unsigned 64-bit units with no "
        "wall-clock meaning; rendering may map them to real time. Within one execution "
        "ticks never decrease. A later run replays an earlier one when both event lists "
        "match in order, channel, and payload, and every tick differs by one constant "
        "shift.");
    root.add_child(std::move(events));

    Node assembly{"assembly"};
    assembly.set_text(
        "Assembly text holds one instruction per line with uppercase mnemonics. A "
        "semicolon starts a comment running to the end of the line. A line may begin "
        "with labels of the form name: where name is an identifier; each label marks the "
        "current code offset. Operands are an unsigned decimal number, 0x followed by "
        "hex digits, a label name, or @ followed by a decimal absolute code offset. The "
        ".entry directive names the entry point the same way and may appear once. "
        "Disassembly lists .entry @N, then one instruction per line in address order "
        "with @N operands for jump and call targets, and reassembles to the identical "
        "program.");
    root.add_child(std::move(assembly));

    return root;
}

} // namespace

const std::vector<std::uint8_t>& vm_self_description() {
    static const std::vector<std::uint8_t> bytes = to_byte_vector(emit_document(build_spec()));
    return bytes;
}

const Digest& vm_spec_digest() {
    static const Digest digest = canonical_digest(vm_self_description());
    return digest;
}

} // namespace tdo
