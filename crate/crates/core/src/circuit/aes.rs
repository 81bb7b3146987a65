//! AES-128 encryption as a Bristol circuit.
//!
//! Alice inputs a key share followed by the plaintext (256 bits), Bob inputs
//! the other key share (128 bits). The key is the XOR of the shares and the
//! 128 ciphertext bits go to Bob. Bytes are in the usual AES order, bits
//! within a byte least significant first.

use super::{Builder, Circuit, OutputTo};
use crate::bitlinalg::BitVec;
use crate::Role;

type Byte = [u32; 8];

/// The S-box as a depth-16 circuit with 34 AND gates.
fn sbox(b: &mut Builder, x: &Byte) -> Byte {
    // U0 is the most significant input bit.
    let u: Vec<u32> = (0..8).map(|i| x[7 - i]).collect();
    let t1 = b.xor(u[0], u[3]);
    let t2 = b.xor(u[0], u[5]);
    let t3 = b.xor(u[0], u[6]);
    let t4 = b.xor(u[3], u[5]);
    let t5 = b.xor(u[4], u[6]);
    let t6 = b.xor(t1, t5);
    let t7 = b.xor(u[1], u[2]);
    let t8 = b.xor(u[7], t6);
    let t9 = b.xor(u[7], t7);
    let t10 = b.xor(t6, t7);
    let t11 = b.xor(u[1], u[5]);
    let t12 = b.xor(u[2], u[5]);
    let t13 = b.xor(t3, t4);
    let t14 = b.xor(t6, t11);
    let t15 = b.xor(t5, t11);
    let t16 = b.xor(t5, t12);
    let t17 = b.xor(t9, t16);
    let t18 = b.xor(u[3], u[7]);
    let t19 = b.xor(t7, t18);
    let t20 = b.xor(t1, t19);
    let t21 = b.xor(u[6], u[7]);
    let t22 = b.xor(t7, t21);
    let t23 = b.xor(t2, t22);
    let t24 = b.xor(t2, t10);
    let t25 = b.xor(t20, t17);
    let t26 = b.xor(t3, t16);
    let t27 = b.xor(t1, t12);

    let m1 = b.and(t13, t6);
    let m2 = b.and(t23, t8);
    let m3 = b.xor(t14, m1);
    let m4 = b.and(t19, u[7]);
    let m5 = b.xor(m4, m1);
    let m6 = b.and(t3, t16);
    let m7 = b.and(t22, t9);
    let m8 = b.xor(t26, m6);
    let m9 = b.and(t20, t17);
    let m10 = b.xor(m9, m6);
    let m11 = b.and(t1, t15);
    let m12 = b.and(t4, t27);
    let m13 = b.xor(m12, m11);
    let m14 = b.and(t2, t10);
    let m15 = b.xor(m14, m11);
    let m16 = b.xor(m3, m2);
    let m17 = b.xor(m5, t24);
    let m18 = b.xor(m8, m7);
    let m19 = b.xor(m10, m15);
    let m20 = b.xor(m16, m13);
    let m21 = b.xor(m17, m15);
    let m22 = b.xor(m18, m13);
    let m23 = b.xor(m19, t25);
    let m24 = b.xor(m22, m23);
    let m25 = b.and(m22, m20);
    let m26 = b.xor(m21, m25);
    let m27 = b.xor(m20, m21);
    let m28 = b.xor(m23, m25);
    let m29 = b.and(m28, m27);
    let m30 = b.and(m26, m24);
    let m31 = b.and(m20, m23);
    let m32 = b.and(m27, m31);
    let m33 = b.xor(m27, m25);
    let m34 = b.and(m21, m22);
    let m35 = b.and(m24, m34);
    let m36 = b.xor(m24, m25);
    let m37 = b.xor(m21, m29);
    let m38 = b.xor(m32, m33);
    let m39 = b.xor(m23, m30);
    let m40 = b.xor(m35, m36);
    let m41 = b.xor(m38, m40);
    let m42 = b.xor(m37, m39);
    let m43 = b.xor(m37, m38);
    let m44 = b.xor(m39, m40);
    let m45 = b.xor(m42, m41);
    let m46 = b.and(m44, t6);
    let m47 = b.and(m40, t8);
    let m48 = b.and(m39, u[7]);
    let m49 = b.and(m43, t16);
    let m50 = b.and(m38, t9);
    let m51 = b.and(m37, t17);
    let m52 = b.and(m42, t15);
    let m53 = b.and(m45, t27);
    let m54 = b.and(m41, t10);
    let m55 = b.and(m44, t13);
    let m56 = b.and(m40, t23);
    let m57 = b.and(m39, t19);
    let m58 = b.and(m43, t3);
    let m59 = b.and(m38, t22);
    let m60 = b.and(m37, t20);
    let m61 = b.and(m42, t1);
    let m62 = b.and(m45, t4);
    let m63 = b.and(m41, t2);

    let l0 = b.xor(m61, m62);
    let l1 = b.xor(m50, m56);
    let l2 = b.xor(m46, m48);
    let l3 = b.xor(m47, m55);
    let l4 = b.xor(m54, m58);
    let l5 = b.xor(m49, m61);
    let l6 = b.xor(m62, l5);
    let l7 = b.xor(m46, l3);
    let l8 = b.xor(m51, m59);
    let l9 = b.xor(m52, m53);
    let l10 = b.xor(m53, l4);
    let l11 = b.xor(m60, l2);
    let l12 = b.xor(m48, m51);
    let l13 = b.xor(m50, l0);
    let l14 = b.xor(m52, m61);
    let l15 = b.xor(m55, l1);
    let l16 = b.xor(m56, l0);
    let l17 = b.xor(m57, l1);
    let l18 = b.xor(m58, l8);
    let l19 = b.xor(m63, l4);
    let l20 = b.xor(l0, l1);
    let l21 = b.xor(l1, l7);
    let l22 = b.xor(l3, l12);
    let l23 = b.xor(l18, l2);
    let l24 = b.xor(l15, l9);
    let l25 = b.xor(l6, l10);
    let l26 = b.xor(l7, l9);
    let l27 = b.xor(l8, l10);
    let l28 = b.xor(l11, l14);
    let l29 = b.xor(l11, l17);

    let s = [
        b.xor(l6, l24),
        b.xnor(l16, l26),
        b.xnor(l19, l28),
        b.xor(l6, l21),
        b.xor(l20, l22),
        b.xor(l25, l29),
        b.xnor(l13, l27),
        b.xnor(l6, l23),
    ];
    // S0 is the most significant output bit.
    std::array::from_fn(|i| s[7 - i])
}

fn xor_byte(b: &mut Builder, x: &Byte, y: &Byte) -> Byte {
    std::array::from_fn(|i| b.xor(x[i], y[i]))
}

fn xor_const(b: &mut Builder, x: &Byte, c: u8) -> Byte {
    std::array::from_fn(|i| if (c >> i) & 1 == 1 { b.inv(x[i]) } else { x[i] })
}

/// Multiplication by 2 in GF(2^8).
fn xtime(b: &mut Builder, x: &Byte) -> Byte {
    [x[7], b.xor(x[0], x[7]), x[1], b.xor(x[2], x[7]), b.xor(x[3], x[7]), x[4], x[5], x[6]]
}

fn mix_column(b: &mut Builder, col: [Byte; 4]) -> [Byte; 4] {
    let doubled: Vec<Byte> = col.iter().map(|a| xtime(b, a)).collect();
    std::array::from_fn(|r| {
        // out_r = 2 a_r + 3 a_{r+1} + a_{r+2} + a_{r+3}
        let a1 = &col[(r + 1) % 4];
        let mut acc = xor_byte(b, &doubled[r], &doubled[(r + 1) % 4]);
        acc = xor_byte(b, &acc, a1);
        acc = xor_byte(b, &acc, &col[(r + 2) % 4]);
        xor_byte(b, &acc, &col[(r + 3) % 4])
    })
}

fn bytes_of(wires: &[u32]) -> Vec<Byte> {
    wires.chunks(8).map(|c| c.try_into().unwrap()).collect()
}

/// Expands a 16-byte key into 11 round keys.
fn key_schedule(b: &mut Builder, key: &[Byte]) -> Vec<Vec<Byte>> {
    let mut words: Vec<[Byte; 4]> = key.chunks(4).map(|w| w.try_into().unwrap()).collect();
    let mut rcon = 1u8;
    for i in 4..44 {
        let prev = words[i - 1];
        let temp = if i % 4 == 0 {
            let rot = [prev[1], prev[2], prev[3], prev[0]];
            let mut sub = rot.map(|x| sbox(b, &x));
            sub[0] = xor_const(b, &sub[0], rcon);
            rcon = gf_double(rcon);
            sub
        } else {
            prev
        };
        let back = words[i - 4];
        words.push(std::array::from_fn(|j| xor_byte(b, &back[j], &temp[j])));
    }
    words.chunks(4).map(|rk| rk.iter().flatten().copied().collect()).collect()
}

fn gf_double(x: u8) -> u8 {
    (x << 1) ^ if x & 0x80 != 0 { 0x1b } else { 0 }
}

/// Builds the circuit.
pub fn aes128_circuit() -> Circuit {
    let mut b = Builder::new(256, 128);
    let alice = b.inputs(Role::Alice);
    let bob = b.inputs(Role::Bob);
    let ka = bytes_of(&alice[..128]);
    let pt = bytes_of(&alice[128..]);
    let kb = bytes_of(&bob);
    let key: Vec<Byte> = ka.iter().zip(&kb).map(|(x, y)| xor_byte(&mut b, x, y)).collect();
    let round_keys = key_schedule(&mut b, &key);

    let mut state: Vec<Byte> = pt.iter().zip(&round_keys[0]).map(|(x, k)| xor_byte(&mut b, x, k)).collect();
    for (round, rk) in round_keys.iter().enumerate().skip(1) {
        let sub: Vec<Byte> = state.iter().map(|x| sbox(&mut b, x)).collect();
        // Column-major state: byte r + 4c sits in row r, column c.
        let shifted: Vec<Byte> = (0..16).map(|i| sub[(i % 4) + 4 * ((i / 4 + i % 4) % 4)]).collect();
        let mixed: Vec<Byte> = if round < 10 {
            shifted
                .chunks(4)
                .flat_map(|c| mix_column(&mut b, [c[0], c[1], c[2], c[3]]))
                .collect()
        } else {
            shifted
        };
        state = mixed.iter().zip(rk).map(|(x, k)| xor_byte(&mut b, x, k)).collect();
    }
    let outputs: Vec<u32> = state.iter().flatten().copied().collect();
    b.finish(&outputs).with_outputs_to(OutputTo::Bob)
}

/// Packs bytes into bits, least significant bit of each byte first.
pub fn bytes_to_bits(bytes: &[u8]) -> BitVec {
    BitVec::from_bools(&bytes.iter().flat_map(|&x| (0..8).map(move |i| (x >> i) & 1 == 1)).collect::<Vec<_>>())
}

pub fn bits_to_bytes(bits: &BitVec) -> Vec<u8> {
    (0..bits.len() / 8)
        .map(|i| (0..8).fold(0u8, |acc, j| acc | ((bits.get(8 * i + j) as u8) << j)))
        .collect()
}

/// Inputs for [`aes128_circuit`] from key shares and plaintext.
pub fn aes_inputs(key_alice: &[u8; 16], plaintext: &[u8; 16], key_bob: &[u8; 16]) -> (BitVec, BitVec) {
    let mut a = key_alice.to_vec();
    a.extend_from_slice(plaintext);
    (bytes_to_bits(&a), bytes_to_bits(key_bob))
}
