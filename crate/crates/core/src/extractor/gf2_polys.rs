//! Irreducible polynomials over GF(2) defining GF(2^ell) for ell = 2..=256.
//!
//! Entry `ell` lists the exponents of the middle terms of the reduction polynomial
//! `x^ell + x^k1 + ... + 1`: the trinomial with the smallest `k` when one exists,
//! otherwise the pentanomial whose exponents `(k3, k2, k1)` are lexicographically
//! smallest. This table is normative: extractor outputs depend on it bit for bit.

pub const MIN_DEGREE: usize = 2;
pub const MAX_DEGREE: usize = 256;

/// Middle exponents, indexed by `ell - MIN_DEGREE`, descending, unused slots 0.
pub const MIDDLE_TERMS: [[u16; 3]; MAX_DEGREE - MIN_DEGREE + 1] = [
    [1, 0, 0],    // 2
    [1, 0, 0],    // 3
    [1, 0, 0],    // 4
    [2, 0, 0],    // 5
    [1, 0, 0],    // 6
    [1, 0, 0],    // 7
    [4, 3, 1],    // 8
    [1, 0, 0],    // 9
    [3, 0, 0],    // 10
    [2, 0, 0],    // 11
    [3, 0, 0],    // 12
    [4, 3, 1],    // 13
    [5, 0, 0],    // 14
    [1, 0, 0],    // 15
    [5, 3, 1],    // 16
    [3, 0, 0],    // 17
    [3, 0, 0],    // 18
    [5, 2, 1],    // 19
    [3, 0, 0],    // 20
    [2, 0, 0],    // 21
    [1, 0, 0],    // 22
    [5, 0, 0],    // 23
    [4, 3, 1],    // 24
    [3, 0, 0],    // 25
    [4, 3, 1],    // 26
    [5, 2, 1],    // 27
    [1, 0, 0],    // 28
    [2, 0, 0],    // 29
    [1, 0, 0],    // 30
    [3, 0, 0],    // 31
    [7, 3, 2],    // 32
    [10, 0, 0],   // 33
    [7, 0, 0],    // 34
    [2, 0, 0],    // 35
    [9, 0, 0],    // 36
    [6, 4, 1],    // 37
    [6, 5, 1],    // 38
    [4, 0, 0],    // 39
    [5, 4, 3],    // 40
    [3, 0, 0],    // 41
    [7, 0, 0],    // 42
    [6, 4, 3],    // 43
    [5, 0, 0],    // 44
    [4, 3, 1],    // 45
    [1, 0, 0],    // 46
    [5, 0, 0],    // 47
    [5, 3, 2],    // 48
    [9, 0, 0],    // 49
    [4, 3, 2],    // 50
    [6, 3, 1],    // 51
    [3, 0, 0],    // 52
    [6, 2, 1],    // 53
    [9, 0, 0],    // 54
    [7, 0, 0],    // 55
    [7, 4, 2],    // 56
    [4, 0, 0],    // 57
    [19, 0, 0],   // 58
    [7, 4, 2],    // 59
    [1, 0, 0],    // 60
    [5, 2, 1],    // 61
    [29, 0, 0],   // 62
    [1, 0, 0],    // 63
    [4, 3, 1],    // 64
    [18, 0, 0],   // 65
    [3, 0, 0],    // 66
    [5, 2, 1],    // 67
    [9, 0, 0],    // 68
    [6, 5, 2],    // 69
    [5, 3, 1],    // 70
    [6, 0, 0],    // 71
    [10, 9, 3],   // 72
    [25, 0, 0],   // 73
    [35, 0, 0],   // 74
    [6, 3, 1],    // 75
    [21, 0, 0],   // 76
    [6, 5, 2],    // 77
    [6, 5, 3],    // 78
    [9, 0, 0],    // 79
    [9, 4, 2],    // 80
    [4, 0, 0],    // 81
    [8, 3, 1],    // 82
    [7, 4, 2],    // 83
    [5, 0, 0],    // 84
    [8, 2, 1],    // 85
    [21, 0, 0],   // 86
    [13, 0, 0],   // 87
    [7, 6, 2],    // 88
    [38, 0, 0],   // 89
    [27, 0, 0],   // 90
    [8, 5, 1],    // 91
    [21, 0, 0],   // 92
    [2, 0, 0],    // 93
    [21, 0, 0],   // 94
    [11, 0, 0],   // 95
    [10, 9, 6],   // 96
    [6, 0, 0],    // 97
    [11, 0, 0],   // 98
    [6, 3, 1],    // 99
    [15, 0, 0],   // 100
    [7, 6, 1],    // 101
    [29, 0, 0],   // 102
    [9, 0, 0],    // 103
    [4, 3, 1],    // 104
    [4, 0, 0],    // 105
    [15, 0, 0],   // 106
    [9, 7, 4],    // 107
    [17, 0, 0],   // 108
    [5, 4, 2],    // 109
    [33, 0, 0],   // 110
    [10, 0, 0],   // 111
    [5, 4, 3],    // 112
    [9, 0, 0],    // 113
    [5, 3, 2],    // 114
    [8, 7, 5],    // 115
    [4, 2, 1],    // 116
    [5, 2, 1],    // 117
    [33, 0, 0],   // 118
    [8, 0, 0],    // 119
    [4, 3, 1],    // 120
    [18, 0, 0],   // 121
    [6, 2, 1],    // 122
    [2, 0, 0],    // 123
    [19, 0, 0],   // 124
    [7, 6, 5],    // 125
    [21, 0, 0],   // 126
    [1, 0, 0],    // 127
    [7, 2, 1],    // 128
    [5, 0, 0],    // 129
    [3, 0, 0],    // 130
    [8, 3, 2],    // 131
    [17, 0, 0],   // 132
    [9, 8, 2],    // 133
    [57, 0, 0],   // 134
    [11, 0, 0],   // 135
    [5, 3, 2],    // 136
    [21, 0, 0],   // 137
    [8, 7, 1],    // 138
    [8, 5, 3],    // 139
    [15, 0, 0],   // 140
    [10, 4, 1],   // 141
    [21, 0, 0],   // 142
    [5, 3, 2],    // 143
    [7, 4, 2],    // 144
    [52, 0, 0],   // 145
    [71, 0, 0],   // 146
    [14, 0, 0],   // 147
    [27, 0, 0],   // 148
    [10, 9, 7],   // 149
    [53, 0, 0],   // 150
    [3, 0, 0],    // 151
    [6, 3, 2],    // 152
    [1, 0, 0],    // 153
    [15, 0, 0],   // 154
    [62, 0, 0],   // 155
    [9, 0, 0],    // 156
    [6, 5, 2],    // 157
    [8, 6, 5],    // 158
    [31, 0, 0],   // 159
    [5, 3, 2],    // 160
    [18, 0, 0],   // 161
    [27, 0, 0],   // 162
    [7, 6, 3],    // 163
    [10, 8, 7],   // 164
    [9, 8, 3],    // 165
    [37, 0, 0],   // 166
    [6, 0, 0],    // 167
    [15, 3, 2],   // 168
    [34, 0, 0],   // 169
    [11, 0, 0],   // 170
    [6, 5, 2],    // 171
    [1, 0, 0],    // 172
    [8, 5, 2],    // 173
    [13, 0, 0],   // 174
    [6, 0, 0],    // 175
    [11, 3, 2],   // 176
    [8, 0, 0],    // 177
    [31, 0, 0],   // 178
    [4, 2, 1],    // 179
    [3, 0, 0],    // 180
    [7, 6, 1],    // 181
    [81, 0, 0],   // 182
    [56, 0, 0],   // 183
    [9, 8, 7],    // 184
    [24, 0, 0],   // 185
    [11, 0, 0],   // 186
    [7, 6, 5],    // 187
    [6, 5, 2],    // 188
    [6, 5, 2],    // 189
    [8, 7, 6],    // 190
    [9, 0, 0],    // 191
    [7, 2, 1],    // 192
    [15, 0, 0],   // 193
    [87, 0, 0],   // 194
    [8, 3, 2],    // 195
    [3, 0, 0],    // 196
    [9, 4, 2],    // 197
    [9, 0, 0],    // 198
    [34, 0, 0],   // 199
    [5, 3, 2],    // 200
    [14, 0, 0],   // 201
    [55, 0, 0],   // 202
    [8, 7, 1],    // 203
    [27, 0, 0],   // 204
    [9, 5, 2],    // 205
    [10, 9, 5],   // 206
    [43, 0, 0],   // 207
    [9, 3, 1],    // 208
    [6, 0, 0],    // 209
    [7, 0, 0],    // 210
    [11, 10, 8],  // 211
    [105, 0, 0],  // 212
    [6, 5, 2],    // 213
    [73, 0, 0],   // 214
    [23, 0, 0],   // 215
    [7, 3, 1],    // 216
    [45, 0, 0],   // 217
    [11, 0, 0],   // 218
    [8, 4, 1],    // 219
    [7, 0, 0],    // 220
    [8, 6, 2],    // 221
    [5, 4, 2],    // 222
    [33, 0, 0],   // 223
    [9, 8, 3],    // 224
    [32, 0, 0],   // 225
    [10, 7, 3],   // 226
    [10, 9, 4],   // 227
    [113, 0, 0],  // 228
    [10, 4, 1],   // 229
    [8, 7, 6],    // 230
    [26, 0, 0],   // 231
    [9, 4, 2],    // 232
    [74, 0, 0],   // 233
    [31, 0, 0],   // 234
    [9, 6, 1],    // 235
    [5, 0, 0],    // 236
    [7, 4, 1],    // 237
    [73, 0, 0],   // 238
    [36, 0, 0],   // 239
    [8, 5, 3],    // 240
    [70, 0, 0],   // 241
    [95, 0, 0],   // 242
    [8, 5, 1],    // 243
    [111, 0, 0],  // 244
    [6, 4, 1],    // 245
    [11, 2, 1],   // 246
    [82, 0, 0],   // 247
    [15, 14, 10], // 248
    [35, 0, 0],   // 249
    [103, 0, 0],  // 250
    [7, 4, 2],    // 251
    [15, 0, 0],   // 252
    [46, 0, 0],   // 253
    [7, 2, 1],    // 254
    [52, 0, 0],   // 255
    [10, 5, 2],   // 256
];
