// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#include "warplens/opcodes.hpp"
#include <algorithm>
#include <array>
#include <cstdio>
#include <unordered_map>

namespace warplens::wasm
{
namespace
{
using enum ImmKind;
using enum OpClass;

// Signature strings: i=i32 I=i64 f=f32 F=f64 v=v128.
constexpr OpInfo kScalar[] = {
    {0x00, "unreachable", None, Control, "", ""},
    {0x01, "nop", None, Control, "", ""},
    {0x02, "block", BlockType, Control, "", ""},
    {0x03, "loop", BlockType, Control, "", ""},
    {0x04, "if", BlockType, Control, "", ""},
    {0x05, "else", None, Control, "", ""},
    {0x0b, "end", None, Control, "", ""},
    {0x0c, "br", Label, Control, "", ""},
    {0x0d, "br_if", Label, Control, "", ""},
    {0x0e, "br_table", LabelTable, Control, "", ""},
    {0x0f, "return", None, Control, "", ""},
    {0x10, "call", Func, Control, "", ""},
    {0x11, "call_indirect", CallIndirect, Control, "", ""},
    {0x12, "return_call", Func, Control, "", ""},
    {0x13, "return_call_indirect", CallIndirect, Control, "", ""},
    {0x1a, "drop", None, Control, "", ""},
    {0x1b, "select", None, Control, "", ""},
    {0x1c, "select", SelectTypes, Control, "", ""},
    {0x20, "local.get", Local, LocalGet, "", ""},
    {0x21, "local.set", Local, LocalSet, "", ""},
    {0x22, "local.tee", Local, LocalTee, "", ""},
    {0x23, "global.get", Global, GlobalGet, "", ""},
    {0x24, "global.set", Global, GlobalSet, "", ""},
    {0x25, "table.get", Table, Other, "", ""},
    {0x26, "table.set", Table, Other, "", ""},
    {0x28, "i32.load", MemArg, Load, "i", "i", 2},
    {0x29, "i64.load", MemArg, Load, "i", "I", 3},
    {0x2a, "f32.load", MemArg, Load, "i", "f", 2},
    {0x2b, "f64.load", MemArg, Load, "i", "F", 3},
    {0x2c, "i32.load8_s", MemArg, Load, "i", "i", 0},
    {0x2d, "i32.load8_u", MemArg, Load, "i", "i", 0},
    {0x2e, "i32.load16_s", MemArg, Load, "i", "i", 1},
    {0x2f, "i32.load16_u", MemArg, Load, "i", "i", 1},
    {0x30, "i64.load8_s", MemArg, Load, "i", "I", 0},
    {0x31, "i64.load8_u", MemArg, Load, "i", "I", 0},
    {0x32, "i64.load16_s", MemArg, Load, "i", "I", 1},
    {0x33, "i64.load16_u", MemArg, Load, "i", "I", 1},
    {0x34, "i64.load32_s", MemArg, Load, "i", "I", 2},
    {0x35, "i64.load32_u", MemArg, Load, "i", "I", 2},
    {0x36, "i32.store", MemArg, Store, "ii", "", 2},
    {0x37, "i64.store", MemArg, Store, "iI", "", 3},
    {0x38, "f32.store", MemArg, Store, "if", "", 2},
    {0x39, "f64.store", MemArg, Store, "iF", "", 3},
    {0x3a, "i32.store8", MemArg, Store, "ii", "", 0},
    {0x3b, "i32.store16", MemArg, Store, "ii", "", 1},
    {0x3c, "i64.store8", MemArg, Store, "iI", "", 0},
    {0x3d, "i64.store16", MemArg, Store, "iI", "", 1},
    {0x3e, "i64.store32", MemArg, Store, "iI", "", 2},
    {0x3f, "memory.size", MemIndex, Other, "", "i"},
    {0x40, "memory.grow", MemIndex, Other, "i", "i"},
    {0x41, "i32.const", I32, Const, "", "i"},
    {0x42, "i64.const", I64, Const, "", "I"},
    {0x43, "f32.const", F32, Const, "", "f"},
    {0x44, "f64.const", F64, Const, "", "F"},
    {0x45, "i32.eqz", None, Numeric, "i", "i"},
    {0x46, "i32.eq", None, Numeric, "ii", "i"},
    {0x47, "i32.ne", None, Numeric, "ii", "i"},
    {0x48, "i32.lt_s", None, Numeric, "ii", "i"},
    {0x49, "i32.lt_u", None, Numeric, "ii", "i"},
    {0x4a, "i32.gt_s", None, Numeric, "ii", "i"},
    {0x4b, "i32.gt_u", None, Numeric, "ii", "i"},
    {0x4c, "i32.le_s", None, Numeric, "ii", "i"},
    {0x4d, "i32.le_u", None, Numeric, "ii", "i"},
    {0x4e, "i32.ge_s", None, Numeric, "ii", "i"},
    {0x4f, "i32.ge_u", None, Numeric, "ii", "i"},
    {0x50, "i64.eqz", None, Numeric, "I", "i"},
    {0x51, "i64.eq", None, Numeric, "II", "i"},
    {0x52, "i64.ne", None, Numeric, "II", "i"},
    {0x53, "i64.lt_s", None, Numeric, "II", "i"},
    {0x54, "i64.lt_u", None, Numeric, "II", "i"},
    {0x55, "i64.gt_s", None, Numeric, "II", "i"},
    {0x56, "i64.gt_u", None, Numeric, "II", "i"},
    {0x57, "i64.le_s", None, Numeric, "II", "i"},
    {0x58, "i64.le_u", None, Numeric, "II", "i"},
    {0x59, "i64.ge_s", None, Numeric, "II", "i"},
    {0x5a, "i64.ge_u", None, Numeric, "II", "i"},
    {0x5b, "f32.eq", None, Numeric, "ff", "i"},
    {0x5c, "f32.ne", None, Numeric, "ff", "i"},
    {0x5d, "f32.lt", None, Numeric, "ff", "i"},
    {0x5e, "f32.gt", None, Numeric, "ff", "i"},
    {0x5f, "f32.le", None, Numeric, "ff", "i"},
    {0x60, "f32.ge", None, Numeric, "ff", "i"},
    {0x61, "f64.eq", None, Numeric, "FF", "i"},
    {0x62, "f64.ne", None, Numeric, "FF", "i"},
    {0x63, "f64.lt", None, Numeric, "FF", "i"},
    {0x64, "f64.gt", None, Numeric, "FF", "i"},
    {0x65, "f64.le", None, Numeric, "FF", "i"},
    {0x66, "f64.ge", None, Numeric, "FF", "i"},
    {0x67, "i32.clz", None, Numeric, "i", "i"},
    {0x68, "i32.ctz", None, Numeric, "i", "i"},
    {0x69, "i32.popcnt", None, Numeric, "i", "i"},
    {0x6a, "i32.add", None, Numeric, "ii", "i"},
    {0x6b, "i32.sub", None, Numeric, "ii", "i"},
    {0x6c, "i32.mul", None, Numeric, "ii", "i"},
    {0x6d, "i32.div_s", None, Numeric, "ii", "i"},
    {0x6e, "i32.div_u", None, Numeric, "ii", "i"},
    {0x6f, "i32.rem_s", None, Numeric, "ii", "i"},
    {0x70, "i32.rem_u", None, Numeric, "ii", "i"},
    {0x71, "i32.and", None, Numeric, "ii", "i"},
    {0x72, "i32.or", None, Numeric, "ii", "i"},
    {0x73, "i32.xor", None, Numeric, "ii", "i"},
    {0x74, "i32.shl", None, Numeric, "ii", "i"},
    {0x75, "i32.shr_s", None, Numeric, "ii", "i"},
    {0x76, "i32.shr_u", None, Numeric, "ii", "i"},
    {0x77, "i32.rotl", None, Numeric, "ii", "i"},
    {0x78, "i32.rotr", None, Numeric, "ii", "i"},
    {0x79, "i64.clz", None, Numeric, "I", "I"},
    {0x7a, "i64.ctz", None, Numeric, "I", "I"},
    {0x7b, "i64.popcnt", None, Numeric, "I", "I"},
    {0x7c, "i64.add", None, Numeric, "II", "I"},
    {0x7d, "i64.sub", None, Numeric, "II", "I"},
    {0x7e, "i64.mul", None, Numeric, "II", "I"},
    {0x7f, "i64.div_s", None, Numeric, "II", "I"},
    {0x80, "i64.div_u", None, Numeric, "II", "I"},
    {0x81, "i64.rem_s", None, Numeric, "II", "I"},
    {0x82, "i64.rem_u", None, Numeric, "II", "I"},
    {0x83, "i64.and", None, Numeric, "II", "I"},
    {0x84, "i64.or", None, Numeric, "II", "I"},
    {0x85, "i64.xor", None, Numeric, "II", "I"},
    {0x86, "i64.shl", None, Numeric, "II", "I"},
    {0x87, "i64.shr_s", None, Numeric, "II", "I"},
    {0x88, "i64.shr_u", None, Numeric, "II", "I"},
    {0x89, "i64.rotl", None, Numeric, "II", "I"},
    {0x8a, "i64.rotr", None, Numeric, "II", "I"},
    {0x8b, "f32.abs", None, Numeric, "f", "f"},
    {0x8c, "f32.neg", None, Numeric, "f", "f"},
    {0x8d, "f32.ceil", None, Numeric, "f", "f"},
    {0x8e, "f32.floor", None, Numeric, "f", "f"},
    {0x8f, "f32.trunc", None, Numeric, "f", "f"},
    {0x90, "f32.nearest", None, Numeric, "f", "f"},
    {0x91, "f32.sqrt", None, Numeric, "f", "f"},
    {0x92, "f32.add", None, Numeric, "ff", "f"},
    {0x93, "f32.sub", None, Numeric, "ff", "f"},
    {0x94, "f32.mul", None, Numeric, "ff", "f"},
    {0x95, "f32.div", None, Numeric, "ff", "f"},
    {0x96, "f32.min", None, Numeric, "ff", "f"},
    {0x97, "f32.max", None, Numeric, "ff", "f"},
    {0x98, "f32.copysign", None, Numeric, "ff", "f"},
    {0x99, "f64.abs", None, Numeric, "F", "F"},
    {0x9a, "f64.neg", None, Numeric, "F", "F"},
    {0x9b, "f64.ceil", None, Numeric, "F", "F"},
    {0x9c, "f64.floor", None, Numeric, "F", "F"},
    {0x9d, "f64.trunc", None, Numeric, "F", "F"},
    {0x9e, "f64.nearest", None, Numeric, "F", "F"},
    {0x9f, "f64.sqrt", None, Numeric, "F", "F"},
    {0xa0, "f64.add", None, Numeric, "FF", "F"},
    {0xa1, "f64.sub", None, Numeric, "FF", "F"},
    {0xa2, "f64.mul", None, Numeric, "FF", "F"},
    {0xa3, "f64.div", None, Numeric, "FF", "F"},
    {0xa4, "f64.min", None, Numeric, "FF", "F"},
    {0xa5, "f64.max", None, Numeric, "FF", "F"},
    {0xa6, "f64.copysign", None, Numeric, "FF", "F"},
    {0xa7, "i32.wrap_i64", None, Numeric, "I", "i"},
    {0xa8, "i32.trunc_f32_s", None, Numeric, "f", "i"},
    {0xa9, "i32.trunc_f32_u", None, Numeric, "f", "i"},
    {0xaa, "i32.trunc_f64_s", None, Numeric, "F", "i"},
    {0xab, "i32.trunc_f64_u", None, Numeric, "F", "i"},
    {0xac, "i64.extend_i32_s", None, Numeric, "i", "I"},
    {0xad, "i64.extend_i32_u", None, Numeric, "i", "I"},
    {0xae, "i64.trunc_f32_s", None, Numeric, "f", "I"},
    {0xaf, "i64.trunc_f32_u", None, Numeric, "f", "I"},
    {0xb0, "i64.trunc_f64_s", None, Numeric, "F", "I"},
    {0xb1, "i64.trunc_f64_u", None, Numeric, "F", "I"},
    {0xb2, "f32.convert_i32_s", None, Numeric, "i", "f"},
    {0xb3, "f32.convert_i32_u", None, Numeric, "i", "f"},
    {0xb4, "f32.convert_i64_s", None, Numeric, "I", "f"},
    {0xb5, "f32.convert_i64_u", None, Numeric, "I", "f"},
    {0xb6, "f32.demote_f64", None, Numeric, "F", "f"},
    {0xb7, "f64.convert_i32_s", None, Numeric, "i", "F"},
    {0xb8, "f64.convert_i32_u", None, Numeric, "i", "F"},
    {0xb9, "f64.convert_i64_s", None, Numeric, "I", "F"},
    {0xba, "f64.convert_i64_u", None, Numeric, "I", "F"},
    {0xbb, "f64.promote_f32", None, Numeric, "f", "F"},
    {0xbc, "i32.reinterpret_f32", None, Numeric, "f", "i"},
    {0xbd, "i64.reinterpret_f64", None, Numeric, "F", "I"},
    {0xbe, "f32.reinterpret_i32", None, Numeric, "i", "f"},
    {0xbf, "f64.reinterpret_i64", None, Numeric, "I", "F"},
    {0xc0, "i32.extend8_s", None, Numeric, "i", "i"},
    {0xc1, "i32.extend16_s", None, Numeric, "i", "i"},
    {0xc2, "i64.extend8_s", None, Numeric, "I", "I"},
    {0xc3, "i64.extend16_s", None, Numeric, "I", "I"},
    {0xc4, "i64.extend32_s", None, Numeric, "I", "I"},
    {0xd0, "ref.null", HeapType, Other, "", ""},
    {0xd1, "ref.is_null", None, Other, "", ""},
    {0xd2, "ref.func", Func, Other, "", ""},
    {prefixed(0xfc, 0), "i32.trunc_sat_f32_s", None, Numeric, "f", "i"},
    {prefixed(0xfc, 1), "i32.trunc_sat_f32_u", None, Numeric, "f", "i"},
    {prefixed(0xfc, 2), "i32.trunc_sat_f64_s", None, Numeric, "F", "i"},
    {prefixed(0xfc, 3), "i32.trunc_sat_f64_u", None, Numeric, "F", "i"},
    {prefixed(0xfc, 4), "i64.trunc_sat_f32_s", None, Numeric, "f", "I"},
    {prefixed(0xfc, 5), "i64.trunc_sat_f32_u", None, Numeric, "f", "I"},
    {prefixed(0xfc, 6), "i64.trunc_sat_f64_s", None, Numeric, "F", "I"},
    {prefixed(0xfc, 7), "i64.trunc_sat_f64_u", None, Numeric, "F", "I"},
    {prefixed(0xfc, 8), "memory.init", MemoryInit, Other, "iii", ""},
    {prefixed(0xfc, 9), "data.drop", Data, Other, "", ""},
    {prefixed(0xfc, 10), "memory.copy", MemoryCopy, Other, "iii", ""},
    {prefixed(0xfc, 11), "memory.fill", MemoryFill, Other, "iii", ""},
    {prefixed(0xfc, 12), "table.init", TableInit, Other, "iii", ""},
    {prefixed(0xfc, 13), "elem.drop", Elem, Other, "", ""},
    {prefixed(0xfc, 14), "table.copy", TableCopy, Other, "iii", ""},
    {prefixed(0xfc, 15), "table.grow", Table, Other, "", ""},
    {prefixed(0xfc, 16), "table.size", Table, Other, "", "i"},
    {prefixed(0xfc, 17), "table.fill", Table, Other, "", ""},
};

// SIMD sub-opcodes 0..255. Empty name = reserved.
struct SimdRow
{
    std::string_view name;
    std::string_view params;
    std::string_view results;
};

constexpr std::array<SimdRow, 256> make_simd_rows()
{
    std::array<SimdRow, 256> t{};
    t[0] = {"v128.load", "i", "v"};
    t[1] = {"v128.load8x8_s", "i", "v"};
    t[2] = {"v128.load8x8_u", "i", "v"};
    t[3] = {"v128.load16x4_s", "i", "v"};
    t[4] = {"v128.load16x4_u", "i", "v"};
    t[5] = {"v128.load32x2_s", "i", "v"};
    t[6] = {"v128.load32x2_u", "i", "v"};
    t[7] = {"v128.load8_splat", "i", "v"};
    t[8] = {"v128.load16_splat", "i", "v"};
    t[9] = {"v128.load32_splat", "i", "v"};
    t[10] = {"v128.load64_splat", "i", "v"};
    t[11] = {"v128.store", "iv", ""};
    t[12] = {"v128.const", "", "v"};
    t[13] = {"i8x16.shuffle", "vv", "v"};
    t[14] = {"i8x16.swizzle", "vv", "v"};
    t[15] = {"i8x16.splat", "i", "v"};
    t[16] = {"i16x8.splat", "i", "v"};
    t[17] = {"i32x4.splat", "i", "v"};
    t[18] = {"i64x2.splat", "I", "v"};
    t[19] = {"f32x4.splat", "f", "v"};
    t[20] = {"f64x2.splat", "F", "v"};
    t[21] = {"i8x16.extract_lane_s", "v", "i"};
    t[22] = {"i8x16.extract_lane_u", "v", "i"};
    t[23] = {"i8x16.replace_lane", "vi", "v"};
    t[24] = {"i16x8.extract_lane_s", "v", "i"};
    t[25] = {"i16x8.extract_lane_u", "v", "i"};
    t[26] = {"i16x8.replace_lane", "vi", "v"};
    t[27] = {"i32x4.extract_lane", "v", "i"};
    t[28] = {"i32x4.replace_lane", "vi", "v"};
    t[29] = {"i64x2.extract_lane", "v", "I"};
    t[30] = {"i64x2.replace_lane", "vI", "v"};
    t[31] = {"f32x4.extract_lane", "v", "f"};
    t[32] = {"f32x4.replace_lane", "vf", "v"};
    t[33] = {"f64x2.extract_lane", "v", "F"};
    t[34] = {"f64x2.replace_lane", "vF", "v"};
    constexpr std::string_view i8cmp[] = {"i8x16.eq", "i8x16.ne", "i8x16.lt_s", "i8x16.lt_u",
        "i8x16.gt_s", "i8x16.gt_u", "i8x16.le_s", "i8x16.le_u", "i8x16.ge_s", "i8x16.ge_u"};
    constexpr std::string_view i16cmp[] = {"i16x8.eq", "i16x8.ne", "i16x8.lt_s", "i16x8.lt_u",
        "i16x8.gt_s", "i16x8.gt_u", "i16x8.le_s", "i16x8.le_u", "i16x8.ge_s", "i16x8.ge_u"};
    constexpr std::string_view i32cmp[] = {"i32x4.eq", "i32x4.ne", "i32x4.lt_s", "i32x4.lt_u",
        "i32x4.gt_s", "i32x4.gt_u", "i32x4.le_s", "i32x4.le_u", "i32x4.ge_s", "i32x4.ge_u"};
    for (int i = 0; i < 10; ++i)
    {
        t[35 + i] = {i8cmp[i], "vv", "v"};
        t[45 + i] = {i16cmp[i], "vv", "v"};
        t[55 + i] = {i32cmp[i], "vv", "v"};
    }
    constexpr std::string_view f32cmp[] = {"f32x4.eq", "f32x4.ne", "f32x4.lt", "f32x4.gt", "f32x4.le", "f32x4.ge"};
    constexpr std::string_view f64cmp[] = {"f64x2.eq", "f64x2.ne", "f64x2.lt", "f64x2.gt", "f64x2.le", "f64x2.ge"};
    for (int i = 0; i < 6; ++i)
    {
        t[65 + i] = {f32cmp[i], "vv", "v"};
        t[71 + i] = {f64cmp[i], "vv", "v"};
    }
    t[77] = {"v128.not", "v", "v"};
    t[78] = {"v128.and", "vv", "v"};
    t[79] = {"v128.andnot", "vv", "v"};
    t[80] = {"v128.or", "vv", "v"};
    t[81] = {"v128.xor", "vv", "v"};
    t[82] = {"v128.bitselect", "vvv", "v"};
    t[83] = {"v128.any_true", "v", "i"};
    t[84] = {"v128.load8_lane", "iv", "v"};
    t[85] = {"v128.load16_lane", "iv", "v"};
    t[86] = {"v128.load32_lane", "iv", "v"};
    t[87] = {"v128.load64_lane", "iv", "v"};
    t[88] = {"v128.store8_lane", "iv", ""};
    t[89] = {"v128.store16_lane", "iv", ""};
    t[90] = {"v128.store32_lane", "iv", ""};
    t[91] = {"v128.store64_lane", "iv", ""};
    t[92] = {"v128.load32_zero", "i", "v"};
    t[93] = {"v128.load64_zero", "i", "v"};
    t[94] = {"f32x4.demote_f64x2_zero", "v", "v"};
    t[95] = {"f64x2.promote_low_f32x4", "v", "v"};
    t[96] = {"i8x16.abs", "v", "v"};
    t[97] = {"i8x16.neg", "v", "v"};
    t[98] = {"i8x16.popcnt", "v", "v"};
    t[99] = {"i8x16.all_true", "v", "i"};
    t[100] = {"i8x16.bitmask", "v", "i"};
    t[101] = {"i8x16.narrow_i16x8_s", "vv", "v"};
    t[102] = {"i8x16.narrow_i16x8_u", "vv", "v"};
    t[103] = {"f32x4.ceil", "v", "v"};
    t[104] = {"f32x4.floor", "v", "v"};
    t[105] = {"f32x4.trunc", "v", "v"};
    t[106] = {"f32x4.nearest", "v", "v"};
    t[107] = {"i8x16.shl", "vi", "v"};
    t[108] = {"i8x16.shr_s", "vi", "v"};
    t[109] = {"i8x16.shr_u", "vi", "v"};
    t[110] = {"i8x16.add", "vv", "v"};
    t[111] = {"i8x16.add_sat_s", "vv", "v"};
    t[112] = {"i8x16.add_sat_u", "vv", "v"};
    t[113] = {"i8x16.sub", "vv", "v"};
    t[114] = {"i8x16.sub_sat_s", "vv", "v"};
    t[115] = {"i8x16.sub_sat_u", "vv", "v"};
    t[116] = {"f64x2.ceil", "v", "v"};
    t[117] = {"f64x2.floor", "v", "v"};
    t[118] = {"i8x16.min_s", "vv", "v"};
    t[119] = {"i8x16.min_u", "vv", "v"};
    t[120] = {"i8x16.max_s", "vv", "v"};
    t[121] = {"i8x16.max_u", "vv", "v"};
    t[122] = {"f64x2.trunc", "v", "v"};
    t[123] = {"i8x16.avgr_u", "vv", "v"};
    t[124] = {"i16x8.extadd_pairwise_i8x16_s", "v", "v"};
    t[125] = {"i16x8.extadd_pairwise_i8x16_u", "v", "v"};
    t[126] = {"i32x4.extadd_pairwise_i16x8_s", "v", "v"};
    t[127] = {"i32x4.extadd_pairwise_i16x8_u", "v", "v"};
    t[128] = {"i16x8.abs", "v", "v"};
    t[129] = {"i16x8.neg", "v", "v"};
    t[130] = {"i16x8.q15mulr_sat_s", "vv", "v"};
    t[131] = {"i16x8.all_true", "v", "i"};
    t[132] = {"i16x8.bitmask", "v", "i"};
    t[133] = {"i16x8.narrow_i32x4_s", "vv", "v"};
    t[134] = {"i16x8.narrow_i32x4_u", "vv", "v"};
    t[135] = {"i16x8.extend_low_i8x16_s", "v", "v"};
    t[136] = {"i16x8.extend_high_i8x16_s", "v", "v"};
    t[137] = {"i16x8.extend_low_i8x16_u", "v", "v"};
    t[138] = {"i16x8.extend_high_i8x16_u", "v", "v"};
    t[139] = {"i16x8.shl", "vi", "v"};
    t[140] = {"i16x8.shr_s", "vi", "v"};
    t[141] = {"i16x8.shr_u", "vi", "v"};
    t[142] = {"i16x8.add", "vv", "v"};
    t[143] = {"i16x8.add_sat_s", "vv", "v"};
    t[144] = {"i16x8.add_sat_u", "vv", "v"};
    t[145] = {"i16x8.sub", "vv", "v"};
    t[146] = {"i16x8.sub_sat_s", "vv", "v"};
    t[147] = {"i16x8.sub_sat_u", "vv", "v"};
    t[148] = {"f64x2.nearest", "v", "v"};
    t[149] = {"i16x8.mul", "vv", "v"};
    t[150] = {"i16x8.min_s", "vv", "v"};
    t[151] = {"i16x8.min_u", "vv", "v"};
    t[152] = {"i16x8.max_s", "vv", "v"};
    t[153] = {"i16x8.max_u", "vv", "v"};
    t[155] = {"i16x8.avgr_u", "vv", "v"};
    t[156] = {"i16x8.extmul_low_i8x16_s", "vv", "v"};
    t[157] = {"i16x8.extmul_high_i8x16_s", "vv", "v"};
    t[158] = {"i16x8.extmul_low_i8x16_u", "vv", "v"};
    t[159] = {"i16x8.extmul_high_i8x16_u", "vv", "v"};
    t[160] = {"i32x4.abs", "v", "v"};
    t[161] = {"i32x4.neg", "v", "v"};
    t[163] = {"i32x4.all_true", "v", "i"};
    t[164] = {"i32x4.bitmask", "v", "i"};
    t[167] = {"i32x4.extend_low_i16x8_s", "v", "v"};
    t[168] = {"i32x4.extend_high_i16x8_s", "v", "v"};
    t[169] = {"i32x4.extend_low_i16x8_u", "v", "v"};
    t[170] = {"i32x4.extend_high_i16x8_u", "v", "v"};
    t[171] = {"i32x4.shl", "vi", "v"};
    t[172] = {"i32x4.shr_s", "vi", "v"};
    t[173] = {"i32x4.shr_u", "vi", "v"};
    t[174] = {"i32x4.add", "vv", "v"};
    t[177] = {"i32x4.sub", "vv", "v"};
    t[181] = {"i32x4.mul", "vv", "v"};
    t[182] = {"i32x4.min_s", "vv", "v"};
    t[183] = {"i32x4.min_u", "vv", "v"};
    t[184] = {"i32x4.max_s", "vv", "v"};
    t[185] = {"i32x4.max_u", "vv", "v"};
    t[186] = {"i32x4.dot_i16x8_s", "vv", "v"};
    t[188] = {"i32x4.extmul_low_i16x8_s", "vv", "v"};
    t[189] = {"i32x4.extmul_high_i16x8_s", "vv", "v"};
    t[190] = {"i32x4.extmul_low_i16x8_u", "vv", "v"};
    t[191] = {"i32x4.extmul_high_i16x8_u", "vv", "v"};
    t[192] = {"i64x2.abs", "v", "v"};
    t[193] = {"i64x2.neg", "v", "v"};
    t[195] = {"i64x2.all_true", "v", "i"};
    t[196] = {"i64x2.bitmask", "v", "i"};
    t[199] = {"i64x2.extend_low_i32x4_s", "v", "v"};
    t[200] = {"i64x2.extend_high_i32x4_s", "v", "v"};
    t[201] = {"i64x2.extend_low_i32x4_u", "v", "v"};
    t[202] = {"i64x2.extend_high_i32x4_u", "v", "v"};
    t[203] = {"i64x2.shl", "vi", "v"};
    t[204] = {"i64x2.shr_s", "vi", "v"};
    t[205] = {"i64x2.shr_u", "vi", "v"};
    t[206] = {"i64x2.add", "vv", "v"};
    t[209] = {"i64x2.sub", "vv", "v"};
    t[213] = {"i64x2.mul", "vv", "v"};
    t[214] = {"i64x2.eq", "vv", "v"};
    t[215] = {"i64x2.ne", "vv", "v"};
    t[216] = {"i64x2.lt_s", "vv", "v"};
    t[217] = {"i64x2.gt_s", "vv", "v"};
    t[218] = {"i64x2.le_s", "vv", "v"};
    t[219] = {"i64x2.ge_s", "vv", "v"};
    t[220] = {"i64x2.extmul_low_i32x4_s", "vv", "v"};
    t[221] = {"i64x2.extmul_high_i32x4_s", "vv", "v"};
    t[222] = {"i64x2.extmul_low_i32x4_u", "vv", "v"};
    t[223] = {"i64x2.extmul_high_i32x4_u", "vv", "v"};
    t[224] = {"f32x4.abs", "v", "v"};
    t[225] = {"f32x4.neg", "v", "v"};
    t[227] = {"f32x4.sqrt", "v", "v"};
    t[228] = {"f32x4.add", "vv", "v"};
    t[229] = {"f32x4.sub", "vv", "v"};
    t[230] = {"f32x4.mul", "vv", "v"};
    t[231] = {"f32x4.div", "vv", "v"};
    t[232] = {"f32x4.min", "vv", "v"};
    t[233] = {"f32x4.max", "vv", "v"};
    t[234] = {"f32x4.pmin", "vv", "v"};
    t[235] = {"f32x4.pmax", "vv", "v"};
    t[236] = {"f64x2.abs", "v", "v"};
    t[237] = {"f64x2.neg", "v", "v"};
    t[239] = {"f64x2.sqrt", "v", "v"};
    t[240] = {"f64x2.add", "vv", "v"};
    t[241] = {"f64x2.sub", "vv", "v"};
    t[242] = {"f64x2.mul", "vv", "v"};
    t[243] = {"f64x2.div", "vv", "v"};
    t[244] = {"f64x2.min", "vv", "v"};
    t[245] = {"f64x2.max", "vv", "v"};
    t[246] = {"f64x2.pmin", "vv", "v"};
    t[247] = {"f64x2.pmax", "vv", "v"};
    t[248] = {"i32x4.trunc_sat_f32x4_s", "v", "v"};
    t[249] = {"i32x4.trunc_sat_f32x4_u", "v", "v"};
    t[250] = {"f32x4.convert_i32x4_s", "v", "v"};
    t[251] = {"f32x4.convert_i32x4_u", "v", "v"};
    t[252] = {"i32x4.trunc_sat_f64x2_s_zero", "v", "v"};
    t[253] = {"i32x4.trunc_sat_f64x2_u_zero", "v", "v"};
    t[254] = {"f64x2.convert_low_i32x4_s", "v", "v"};
    t[255] = {"f64x2.convert_low_i32x4_u", "v", "v"};
    return t;
}

constexpr auto kSimdRows = make_simd_rows();

ImmKind simd_imm(std::uint32_t sub) noexcept
{
    if (sub <= 11 || sub == 92 || sub == 93)
        return MemArg;
    if (sub == 12)
        return V128;
    if (sub == 13)
        return Shuffle;
    if (sub >= 21 && sub <= 34)
        return Lane;
    if (sub >= 84 && sub <= 91)
        return MemArgLane;
    return None;
}

std::uint8_t simd_natural_align(std::uint32_t sub) noexcept
{
    switch (sub)
    {
    case 0:
    case 11:
        return 4;
    case 1: case 2: case 3: case 4: case 5: case 6: case 10: case 87: case 91: case 93:
        return 3;
    case 9: case 86: case 90: case 92:
        return 2;
    case 8: case 85: case 89:
        return 1;
    default:
        return 0;
    }
}

struct Tables
{
    std::vector<OpInfo> simd;
    std::unordered_map<Opcode, const OpInfo*> by_code;
    std::unordered_map<std::string_view, const OpInfo*> by_name;

    Tables()
    {
        simd.reserve(256);
        for (std::uint32_t sub = 0; sub < 256; ++sub)
        {
            const auto& row = kSimdRows[sub];
            if (row.name.empty())
                continue;
            simd.push_back({prefixed(0xfd, sub), row.name, simd_imm(sub), Other, row.params,
                row.results, simd_natural_align(sub)});
        }
        for (const auto& info : kScalar)
        {
            by_code.emplace(info.code, &info);
            // select has two encodings; the name resolves to the untyped one.
            by_name.emplace(info.name, &info);
        }
        for (const auto& info : simd)
        {
            by_code.emplace(info.code, &info);
            by_name.emplace(info.name, &info);
        }
    }
};

const Tables& tables()
{
    static const Tables t;
    return t;
}

ValType decode_type_char(char c)
{
    switch (c)
    {
    case 'i':
        return ValType::i32;
    case 'I':
        return ValType::i64;
    case 'f':
        return ValType::f32;
    case 'F':
        return ValType::f64;
    default:
        return ValType::v128;
    }
}
}  // namespace

std::optional<ValType> valtype_from_byte(std::uint8_t b) noexcept
{
    switch (b)
    {
    case 0x7f:
    case 0x7e:
    case 0x7d:
    case 0x7c:
    case 0x7b:
    case 0x70:
    case 0x6f:
        return static_cast<ValType>(b);
    default:
        return std::nullopt;
    }
}

std::string_view valtype_name(ValType t) noexcept
{
    switch (t)
    {
    case ValType::i32:
        return "i32";
    case ValType::i64:
        return "i64";
    case ValType::f32:
        return "f32";
    case ValType::f64:
        return "f64";
    case ValType::v128:
        return "v128";
    case ValType::funcref:
        return "funcref";
    case ValType::externref:
        return "externref";
    }
    return "?";
}

const OpInfo* op_info(Opcode code) noexcept
{
    const auto& t = tables();
    const auto it = t.by_code.find(code);
    return it == t.by_code.end() ? nullptr : it->second;
}

const OpInfo* op_info(std::string_view name) noexcept
{
    const auto& t = tables();
    const auto it = t.by_name.find(name);
    return it == t.by_name.end() ? nullptr : it->second;
}

std::span<const OpInfo> scalar_opcodes() noexcept
{
    return kScalar;
}

OperatorType static_signature(const OpInfo& info)
{
    OperatorType sig;
    for (const char c : info.params)
        sig.params.push_back(decode_type_char(c));
    for (const char c : info.results)
        sig.results.push_back(decode_type_char(c));
    return sig;
}

std::string opcode_name(Opcode code)
{
    if (const auto* info = op_info(code))
        return std::string{info->name};
    char buf[32];
    if (code > 0xff)
        std::snprintf(buf, sizeof buf, "<0x%02x 0x%x>", code >> 16, code & 0xffff);
    else
        std::snprintf(buf, sizeof buf, "<0x%02x>", code);
    return buf;
}

std::vector<Opcode> substitution_group(const OperatorType& sig)
{
    std::vector<Opcode> group;
    const auto numeric = [](ValType t) { return is_numeric(t); };
    if (!std::all_of(sig.params.begin(), sig.params.end(), numeric) ||
        !std::all_of(sig.results.begin(), sig.results.end(), numeric))
        return group;
    // kScalar is ordered by opcode number, prefixed opcodes after single-byte ones.
    for (const auto& info : kScalar)
    {
        if (info.cls == OpClass::Numeric && static_signature(info) == sig)
            group.push_back(info.code);
    }
    return group;
}
}  // namespace warplens::wasm
