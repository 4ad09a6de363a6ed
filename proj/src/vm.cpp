#include "tdo/vm.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include "tdo/canonical.hpp"
#include "tdo/errors.hpp"
#include "tdo/textcodec.hpp"

namespace tdo {

namespace {

constexpr std::string_view kMagic = "DEVM/1\n";
constexpr std::size_t kStackLimit = 65536;
constexpr std::uint64_t kMemoryLimit = 1u << 24;

enum Op : std::uint8_t {
    OP_HALT = 0x00,
    OP_PUSH = 0x01,
    OP_POP = 0x02,
    OP_DUP = 0x03,
    OP_SWAP = 0x04,
    OP_PICK = 0x05,
    OP_ADD = 0x10,
    OP_SUB = 0x11,
    OP_MUL = 0x12,
    OP_DIVMOD = 0x13,
    OP_AND = 0x14,
    OP_OR = 0x15,
    OP_XOR = 0x16,
    OP_NOT = 0x17,
    OP_SHL = 0x18,
    OP_SHR = 0x19,
    OP_CMP = 0x1a,
    OP_JMP = 0x20,
    OP_JZ = 0x21,
    OP_CALL = 0x22,
    OP_RET = 0x23,
    OP_LOAD8 = 0x30,
    OP_LOAD64 = 0x31,
    OP_STORE8 = 0x32,
    OP_STORE64 = 0x33,
    OP_INSIZE = 0x40,
    OP_INREAD = 0x41,
    OP_OUTB = 0x42,
    OP_EMIT = 0x43,
};

struct OpInfo {
    std::uint8_t code;
    const char* name;
    bool has_imm;
    bool imm_is_target;
};

constexpr OpInfo kOps[] = {
    {OP_HALT, "HALT", false, false},    {OP_PUSH, "PUSH", true, false},
    {OP_POP, "POP", false, false},      {OP_DUP, "DUP", false, false},
    {OP_SWAP, "SWAP", false, false},    {OP_PICK, "PICK", false, false},
    {OP_ADD, "ADD", false, false},      {OP_SUB, "SUB", false, false},
    {OP_MUL, "MUL", false, false},      {OP_DIVMOD, "DIVMOD", false, false},
    {OP_AND, "AND", false, false},      {OP_OR, "OR", false, false},
    {OP_XOR, "XOR", false, false},      {OP_NOT, "NOT", false, false},
    {OP_SHL, "SHL", false, false},      {OP_SHR, "SHR", false, false},
    {OP_CMP, "CMP", false, false},      {OP_JMP, "JMP", true, true},
    {OP_JZ, "JZ", true, true},          {OP_CALL, "CALL", true, true},
    {OP_RET, "RET", false, false},      {OP_LOAD8, "LOAD8", false, false},
    {OP_LOAD64, "LOAD64", false, false}, {OP_STORE8, "STORE8", false, false},
    {OP_STORE64, "STORE64", false, false}, {OP_INSIZE, "INSIZE", false, false},
    {OP_INREAD, "INREAD", false, false}, {OP_OUTB, "OUTB", false, false},
    {OP_EMIT, "EMIT", false, false},
};

const OpInfo* op_by_code(std::uint8_t code) {
    for (const OpInfo& op : kOps) {
        if (op.code == code) {
            return &op;
        }
    }
    return nullptr;
}

const OpInfo* op_by_name(std::string_view name) {
    for (const OpInfo& op : kOps) {
        if (op.name == name) {
            return &op;
        }
    }
    return nullptr;
}

std::uint64_t read_le64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) {
        v = (v << 8) | p[i];
    }
    return v;
}

void write_le64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

// Instruction boundaries, computed by one linear decode; throws VmError for
// unknown opcodes, truncated immediates, or static targets off a boundary.
std::vector<bool> validate_code(const std::vector<std::uint8_t>& code, std::uint64_t entry) {
    if (code.empty()) {
        throw VmError("program has no code");
    }
    std::vector<bool> boundary(code.size(), false);
    std::vector<std::pair<std::uint64_t, std::uint64_t>> targets; // (at, to)
    std::uint64_t off = 0;
    while (off < code.size()) {
        const OpInfo* op = op_by_code(code[off]);
        if (!op) {
            throw VmError("unknown opcode at offset " + std::to_string(off));
        }
        boundary[off] = true;
        std::uint64_t next = off + 1;
        if (op->has_imm) {
            if (code.size() - off < 9) {
                throw VmError("truncated immediate at offset " + std::to_string(off));
            }
            if (op->imm_is_target) {
                targets.emplace_back(off, read_le64(code.data() + off + 1));
            }
            next = off + 9;
        }
        off = next;
    }
    auto on_boundary = [&](std::uint64_t t) { return t < code.size() && boundary[t]; };
    if (!on_boundary(entry)) {
        throw VmError("entry offset is not an instruction boundary");
    }
    for (auto [at, to] : targets) {
        if (!on_boundary(to)) {
            throw VmError("jump target at offset " + std::to_string(at) +
                          " is not an instruction boundary");
        }
    }
    return boundary;
}

struct TrapSignal {
    const char* reason;
};

} // namespace

std::string_view to_string(HaltKind k) {
    switch (k) {
    case HaltKind::normal: return "normal";
    case HaltKind::fuel_exhausted: return "fuel-exhausted";
    case HaltKind::trap: return "trap";
    }
    return "trap";
}

std::vector<std::uint8_t> program_bytes(const VmProgram& program) {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), kMagic.begin(), kMagic.end());
    write_le64(out, program.entry);
    write_le64(out, program.code.size());
    out.insert(out.end(), program.code.begin(), program.code.end());
    return out;
}

VmProgram load_program(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kMagic.size() + 16 ||
        !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
        throw VmError("not a DEVM/1 program container");
    }
    VmProgram program;
    program.entry = read_le64(bytes.data() + kMagic.size());
    std::uint64_t code_len = read_le64(bytes.data() + kMagic.size() + 8);
    if (bytes.size() - kMagic.size() - 16 != code_len) {
        throw VmError("program container length mismatch");
    }
    program.code.assign(bytes.begin() + kMagic.size() + 16, bytes.end());
    validate_code(program.code, program.entry);
    return program;
}

ExecutionResult execute(const VmProgram& program, std::span<const std::uint8_t> input,
                        std::uint64_t fuel) {
    if (fuel == 0) {
        throw VmError("fuel must be positive");
    }
    std::vector<bool> boundary = validate_code(program.code, program.entry);
    const std::vector<std::uint8_t>& code = program.code;

    ExecutionResult result;
    std::vector<std::uint64_t> stack;
    std::vector<std::uint8_t> mem;
    std::uint64_t pc = program.entry;

    auto pop = [&]() -> std::uint64_t {
        if (stack.empty()) {
            throw TrapSignal{"stack_underflow"};
        }
        std::uint64_t v = stack.back();
        stack.pop_back();
        return v;
    };
    auto push = [&](std::uint64_t v) {
        if (stack.size() >= kStackLimit) {
            throw TrapSignal{"stack_overflow"};
        }
        stack.push_back(v);
    };
    auto load8 = [&](std::uint64_t addr) -> std::uint64_t {
        if (addr >= kMemoryLimit) {
            throw TrapSignal{"memory_bounds"};
        }
        return addr < mem.size() ? mem[addr] : 0;
    };
    auto store8 = [&](std::uint64_t addr, std::uint8_t v) {
        if (addr >= kMemoryLimit) {
            throw TrapSignal{"memory_bounds"};
        }
        if (addr >= mem.size()) {
            mem.resize(addr + 1, 0);
        }
        mem[addr] = v;
    };
    auto range_check = [&](std::uint64_t addr, std::uint64_t len) {
        if (len > kMemoryLimit || addr > kMemoryLimit - len) {
            throw TrapSignal{"memory_bounds"};
        }
    };

    while (true) {
        if (result.instructions_executed == fuel) {
            result.halted = HaltKind::fuel_exhausted;
            break;
        }
        if (pc >= code.size()) {
            result.halted = HaltKind::trap;
            result.trap_offset = pc;
            result.trap_reason = "end_of_code";
            break;
        }
        const std::uint8_t opcode = code[pc];
        const std::uint64_t at = pc;
        ++result.instructions_executed;
        try {
            switch (opcode) {
            case OP_HALT:
                result.halted = HaltKind::normal;
                return result;
            case OP_PUSH:
                push(read_le64(code.data() + pc + 1));
                pc += 9;
                break;
            case OP_POP:
                pop();
                pc += 1;
                break;
            case OP_DUP: {
                std::uint64_t v = pop();
                push(v);
                push(v);
                pc += 1;
                break;
            }
            case OP_SWAP: {
                std::uint64_t a = pop();
                std::uint64_t b = pop();
                push(a);
                push(b);
                pc += 1;
                break;
            }
            case OP_PICK: {
                std::uint64_t k = pop();
                if (k >= stack.size()) {
                    throw TrapSignal{"pick_out_of_range"};
                }
                push(stack[stack.size() - 1 - k]);
                pc += 1;
                break;
            }
            case OP_ADD: {
                std::uint64_t y = pop(), x = pop();
                push(x + y);
                pc += 1;
                break;
            }
            case OP_SUB: {
                std::uint64_t y = pop(), x = pop();
                push(x - y);
                pc += 1;
                break;
            }
            case OP_MUL: {
                std::uint64_t y = pop(), x = pop();
                push(x * y);
                pc += 1;
                break;
            }
            case OP_DIVMOD: {
                std::uint64_t divisor = pop(), dividend = pop();
                if (divisor == 0) {
                    throw TrapSignal{"division_by_zero"};
                }
                push(dividend / divisor);
                push(dividend % divisor);
                pc += 1;
                break;
            }
            case OP_AND: {
                std::uint64_t y = pop(), x = pop();
                push(x & y);
                pc += 1;
                break;
            }
            case OP_OR: {
                std::uint64_t y = pop(), x = pop();
                push(x | y);
                pc += 1;
                break;
            }
            case OP_XOR: {
                std::uint64_t y = pop(), x = pop();
                push(x ^ y);
                pc += 1;
                break;
            }
            case OP_NOT:
                push(~pop());
                pc += 1;
                break;
            case OP_SHL: {
                std::uint64_t y = pop(), x = pop();
                push(y >= 64 ? 0 : x << y);
                pc += 1;
                break;
            }
            case OP_SHR: {
                std::uint64_t y = pop(), x = pop();
                push(y >= 64 ? 0 : x >> y);
                pc += 1;
                break;
            }
            case OP_CMP: {
                std::uint64_t y = pop(), x = pop();
                push(x == y ? 0 : (x > y ? 1 : ~std::uint64_t{0}));
                pc += 1;
                break;
            }
            case OP_JMP:
                pc = read_le64(code.data() + pc + 1);
                break;
            case OP_JZ: {
                std::uint64_t target = read_le64(code.data() + pc + 1);
                pc = (pop() == 0) ? target : pc + 9;
                break;
            }
            case OP_CALL: {
                std::uint64_t target = read_le64(code.data() + pc + 1);
                push(pc + 9);
                pc = target;
                break;
            }
            case OP_RET: {
                std::uint64_t a = pop();
                if (a >= code.size() || !boundary[a]) {
                    throw TrapSignal{"bad_return_address"};
                }
                pc = a;
                break;
            }
            case OP_LOAD8:
                push(load8(pop()));
                pc += 1;
                break;
            case OP_LOAD64: {
                std::uint64_t addr = pop();
                range_check(addr, 8);
                std::uint64_t v = 0;
                for (int i = 7; i >= 0; --i) {
                    v = (v << 8) | load8(addr + i);
                }
                push(v);
                pc += 1;
                break;
            }
            case OP_STORE8: {
                std::uint64_t addr = pop();
                std::uint64_t v = pop();
                store8(addr, static_cast<std::uint8_t>(v));
                pc += 1;
                break;
            }
            case OP_STORE64: {
                std::uint64_t addr = pop();
                std::uint64_t v = pop();
                range_check(addr, 8);
                for (int i = 0; i < 8; ++i) {
                    store8(addr + i, static_cast<std::uint8_t>(v >> (8 * i)));
                }
                pc += 1;
                break;
            }
            case OP_INSIZE:
                push(input.size());
                pc += 1;
                break;
            case OP_INREAD: {
                std::uint64_t off = pop();
                if (off >= input.size()) {
                    throw TrapSignal{"input_bounds"};
                }
                push(input[off]);
                pc += 1;
                break;
            }
            case OP_OUTB:
                result.output.push_back(static_cast<std::uint8_t>(pop()));
                pc += 1;
                break;
            case OP_EMIT: {
                std::uint64_t payload_len = pop();
                std::uint64_t payload_addr = pop();
                std::uint64_t chan_len = pop();
                std::uint64_t chan_addr = pop();
                std::uint64_t t = pop();
                if (chan_len < 1 || chan_len > 32) {
                    throw TrapSignal{"bad_event_channel"};
                }
                range_check(chan_addr, chan_len);
                range_check(payload_addr, payload_len);
                TimedEvent ev;
                ev.t = t;
                for (std::uint64_t i = 0; i < chan_len; ++i) {
                    std::uint64_t c = load8(chan_addr + i);
                    if (c < 0x21 || c > 0x7e) {
                        throw TrapSignal{"bad_event_channel"};
                    }
                    ev.channel.push_back(static_cast<char>(c));
                }
                for (std::uint64_t i = 0; i < payload_len; ++i) {
                    ev.payload.push_back(static_cast<std::uint8_t>(load8(payload_addr + i)));
                }
                if (!result.events.empty() && t < result.events.back().t) {
                    throw TrapSignal{"event_time_regression"};
                }
                result.events.push_back(std::move(ev));
                pc += 1;
                break;
            }
            default:
                throw TrapSignal{"unknown_opcode"}; // unreachable after validate_code
            }
        } catch (const TrapSignal& trap) {
            result.halted = HaltKind::trap;
            result.trap_offset = at;
            result.trap_reason = trap.reason;
            return result;
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

namespace {

bool is_ident(std::string_view s) {
    if (s.empty()) {
        return false;
    }
    if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) {
        return false;
    }
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
}

std::vector<std::string_view> tokenize(std::string_view line) {
    if (auto comment = line.find(';'); comment != std::string_view::npos) {
        line = line.substr(0, comment);
    }
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) {
            ++i;
        }
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') {
            ++i;
        }
        if (i > start) {
            tokens.push_back(line.substr(start, i - start));
        }
    }
    return tokens;
}

[[noreturn]] void asm_fail(std::size_t line_no, const std::string& msg) {
    throw AssemblyError("line " + std::to_string(line_no) + ": " + msg);
}

std::uint64_t parse_number(std::string_view tok, std::size_t line_no) {
    std::uint64_t v = 0;
    std::from_chars_result r{};
    if (tok.size() > 2 && tok[0] == '0' && (tok[1] == 'x' || tok[1] == 'X')) {
        r = std::from_chars(tok.data() + 2, tok.data() + tok.size(), v, 16);
    } else {
        r = std::from_chars(tok.data(), tok.data() + tok.size(), v, 10);
    }
    if (r.ec != std::errc{} || r.ptr != tok.data() + tok.size()) {
        asm_fail(line_no, "bad numeric operand \"" + std::string(tok) + "\"");
    }
    return v;
}

struct PendingInstr {
    const OpInfo* op;
    std::string operand; // empty when the op takes none
    std::uint64_t offset;
    std::size_t line_no;
};

} // namespace

VmProgram assemble(std::string_view source) {
    std::map<std::string, std::uint64_t, std::less<>> labels;
    std::vector<PendingInstr> instrs;
    std::optional<std::pair<std::string, std::size_t>> entry_operand;

    std::uint64_t offset = 0;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= source.size()) {
        std::size_t eol = source.find('\n', pos);
        std::string_view line = source.substr(
            pos, eol == std::string_view::npos ? source.size() - pos : eol - pos);
        ++line_no;
        pos = eol == std::string_view::npos ? source.size() + 1 : eol + 1;
        if (eol == std::string_view::npos && line.empty()) {
            break;
        }

        std::vector<std::string_view> tokens = tokenize(line);
        std::size_t i = 0;
        while (i < tokens.size() && tokens[i].back() == ':') {
            std::string_view name = tokens[i].substr(0, tokens[i].size() - 1);
            if (!is_ident(name)) {
                asm_fail(line_no, "bad label \"" + std::string(tokens[i]) + "\"");
            }
            if (!labels.emplace(std::string(name), offset).second) {
                asm_fail(line_no, "duplicate label \"" + std::string(name) + "\"");
            }
            ++i;
        }
        if (i == tokens.size()) {
            continue;
        }
        std::string_view head = tokens[i];
        if (head == ".entry") {
            if (i + 2 != tokens.size()) {
                asm_fail(line_no, ".entry takes exactly one operand");
            }
            if (entry_operand) {
                asm_fail(line_no, "duplicate .entry directive");
            }
            entry_operand = {std::string(tokens[i + 1]), line_no};
            continue;
        }
        const OpInfo* op = op_by_name(head);
        if (!op) {
            asm_fail(line_no, "unknown mnemonic \"" + std::string(head) + "\"");
        }
        if (op->has_imm) {
            if (i + 2 != tokens.size()) {
                asm_fail(line_no, std::string(op->name) + " takes exactly one operand");
            }
            instrs.push_back(PendingInstr{op, std::string(tokens[i + 1]), offset, line_no});
            offset += 9;
        } else {
            if (i + 1 != tokens.size()) {
                asm_fail(line_no, std::string(op->name) + " takes no operand");
            }
            instrs.push_back(PendingInstr{op, {}, offset, line_no});
            offset += 1;
        }
    }
    if (instrs.empty()) {
        throw AssemblyError("program has no instructions");
    }

    const std::uint64_t code_len = offset;
    auto is_boundary = [&](std::uint64_t target) {
        auto it = std::lower_bound(instrs.begin(), instrs.end(), target,
                                   [](const PendingInstr& p, std::uint64_t t) {
                                       return p.offset < t;
                                   });
        return it != instrs.end() && it->offset == target;
    };
    auto resolve = [&](const std::string& tok, bool must_be_target,
                       std::size_t at_line) -> std::uint64_t {
        std::uint64_t value = 0;
        if (!tok.empty() && tok[0] == '@') {
            value = parse_number(std::string_view(tok).substr(1), at_line);
            if (!is_boundary(value)) {
                asm_fail(at_line, "target " + tok + " is not an instruction boundary");
            }
            return value;
        }
        if (is_ident(tok)) {
            auto it = labels.find(tok);
            if (it == labels.end()) {
                asm_fail(at_line, "unresolved label \"" + tok + "\"");
            }
            value = it->second;
        } else {
            value = parse_number(tok, at_line);
        }
        if (must_be_target && !is_boundary(value)) {
            asm_fail(at_line, "target " + std::to_string(value) + " of range 0.." +
                                  std::to_string(code_len) + " is not an instruction boundary");
        }
        return value;
    };

    VmProgram program;
    program.code.reserve(code_len);
    for (const PendingInstr& ins : instrs) {
        program.code.push_back(ins.op->code);
        if (ins.op->has_imm) {
            std::uint64_t value = resolve(ins.operand, ins.op->imm_is_target, ins.line_no);
            write_le64(program.code, value);
        }
    }
    if (entry_operand) {
        program.entry = resolve(entry_operand->first, true, entry_operand->second);
    } else {
        program.entry = 0;
    }
    validate_code(program.code, program.entry);
    return program;
}

std::string disassemble(const VmProgram& program) {
    validate_code(program.code, program.entry);
    std::string out = ".entry @" + std::to_string(program.entry) + "\n";
    std::uint64_t off = 0;
    while (off < program.code.size()) {
        const OpInfo* op = op_by_code(program.code[off]);
        out += op->name;
        if (op->has_imm) {
            std::uint64_t imm = read_le64(program.code.data() + off + 1);
            out += op->imm_is_target ? " @" + std::to_string(imm) : " " + std::to_string(imm);
            off += 9;
        } else {
            off += 1;
        }
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Content decoding
// ---------------------------------------------------------------------------

namespace {

std::optional<VmProgram> find_decoder(const TrustworthyDigitalObject& tdo, const Digest& wanted,
                                      int depth) {
    for (const ContentBlob& blob : tdo.payload) {
        if (blob.encoding == BlobEncoding::vm_program && sha256(blob.bytes) == wanted) {
            return load_program(blob.bytes);
        }
    }
    if (depth <= 0) {
        return std::nullopt;
    }
    for (const ContentBlob& blob : tdo.payload) {
        if (blob.encoding != BlobEncoding::raw || blob.media_hint != "application/tdo") {
            continue;
        }
        try {
            TrustworthyDigitalObject nested = decode(blob.bytes);
            if (auto found = find_decoder(nested, wanted, depth - 1)) {
                return found;
            }
        } catch (const Error&) {
            // Not a nested object; keep looking.
        }
    }
    return std::nullopt;
}

} // namespace

std::vector<std::uint8_t> decode_content(const ContentBlob& blob,
                                         const TrustworthyDigitalObject& tdo,
                                         std::uint64_t fuel) {
    if (blob.encoding != BlobEncoding::vm_encoded) {
        throw StructuralError("blob \"" + blob.name + "\" is not vm-encoded");
    }
    if (!blob.decoder_ref) {
        throw StructuralError("blob \"" + blob.name + "\" names no decoder");
    }
    std::optional<VmProgram> decoder = find_decoder(tdo, *blob.decoder_ref, 64);
    if (!decoder) {
        throw VmError("no payload blob matches decoder digest " + blob.decoder_ref->hex());
    }
    ExecutionResult result = execute(*decoder, blob.bytes, fuel);
    if (result.halted != HaltKind::normal) {
        std::string how = result.halted == HaltKind::fuel_exhausted
                              ? "ran out of fuel"
                              : "trapped (" + result.trap_reason + " at offset " +
                                    std::to_string(result.trap_offset) + ")";
        throw VmError("decoder " + how + " after " +
                      std::to_string(result.instructions_executed) + " instructions");
    }
    return result.output;
}

// ---------------------------------------------------------------------------
// Replay
// ---------------------------------------------------------------------------

std::optional<std::int64_t> replay_equivalent(const std::vector<TimedEvent>& a,
                                              const std::vector<TimedEvent>& b) {
    if (a.size() != b.size()) {
        return std::nullopt;
    }
    if (a.empty()) {
        return std::int64_t{0};
    }
    const std::uint64_t shift = b[0].t - a[0].t;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (b[i].t - a[i].t != shift || a[i].channel != b[i].channel ||
            a[i].payload != b[i].payload) {
            return std::nullopt;
        }
    }
    return static_cast<std::int64_t>(shift);
}

std::string events_to_text(const std::vector<TimedEvent>& events) {
    std::string out;
    for (const TimedEvent& e : events) {
        out += std::to_string(e.t);
        out += ' ';
        out += e.channel;
        out += ' ';
        out += e.payload.empty() ? "-" : hex_encode(e.payload);
        out += '\n';
    }
    return out;
}

std::vector<TimedEvent> events_from_text(std::string_view text) {
    std::vector<TimedEvent> events;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) {
            throw ParseError("event log is missing its final newline", pos);
        }
        std::string_view line = text.substr(pos, eol - pos);
        std::size_t s1 = line.find(' ');
        std::size_t s2 = s1 == std::string_view::npos ? s1 : line.find(' ', s1 + 1);
        if (s1 == std::string_view::npos || s2 == std::string_view::npos ||
            line.find(' ', s2 + 1) != std::string_view::npos) {
            throw ParseError("event line must be \"t channel payload\"", pos);
        }
        std::string_view t_text = line.substr(0, s1);
        std::string_view channel = line.substr(s1 + 1, s2 - s1 - 1);
        std::string_view payload = line.substr(s2 + 1);
        TimedEvent ev;
        auto r = std::from_chars(t_text.data(), t_text.data() + t_text.size(), ev.t, 10);
        if (t_text.empty() || r.ec != std::errc{} || r.ptr != t_text.data() + t_text.size()) {
            throw ParseError("bad event time", pos);
        }
        if (channel.empty() || channel.size() > 32 ||
            !std::all_of(channel.begin(), channel.end(),
                         [](char c) { return c >= 0x21 && c <= 0x7e; })) {
            throw ParseError("bad event channel", pos);
        }
        ev.channel = std::string(channel);
        if (payload != "-") {
            auto bytes = hex_decode(payload);
            if (!bytes) {
                throw ParseError("bad event payload hex", pos);
            }
            ev.payload = std::move(*bytes);
        }
        if (!events.empty() && ev.t < events.back().t) {
            throw ParseError("event times must be nondecreasing", pos);
        }
        events.push_back(std::move(ev));
        pos = eol + 1;
    }
    return events;
}

} // namespace tdo
