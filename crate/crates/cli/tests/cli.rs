use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn knapforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_knapforge")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn keygen(dir: &Path, system: &str, s: &str, p: &str, seed: &str) -> String {
    let prefix = dir.join("k").to_string_lossy().into_owned();
    let out = knapforge(&["keygen", "--system", system, "--s", s, "--p", p, "--seed", seed, "--out", &prefix]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    prefix
}

#[test]
fn message_roundtrip_every_system() {
    let dir = tempfile::tempdir().unwrap();
    for system in ["1", "2", "3"] {
        let prefix = keygen(dir.path(), system, "8", "1e3", "5");
        let pubkey = format!("{prefix}.pub");
        let privkey = format!("{prefix}.priv");
        assert!(fs::read_to_string(&pubkey).unwrap().starts_with(&format!("KNAPFORGE v1 {system} pub")));
        let enc = knapforge(&["encrypt", "--key", &pubkey, "--message", "10110001"]);
        assert!(enc.status.success());
        let ct = stdout(&enc).trim().to_string();
        let dec = knapforge(&["decrypt", "--key", &privkey, "--ct", &ct]);
        assert!(dec.status.success());
        assert_eq!(stdout(&dec).trim(), "10110001");
    }
}

#[test]
fn file_roundtrip_through_chunks() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = keygen(dir.path(), "2", "13", "1000", "9");
    let plain = dir.path().join("plain.bin");
    let data: Vec<u8> = (0..1000u32).map(|i| (i * 31 % 251) as u8).collect();
    fs::write(&plain, &data).unwrap();
    let ct = dir.path().join("ct.txt");
    let back = dir.path().join("back.bin");
    let enc = knapforge(&[
        "encrypt", "--key", &format!("{prefix}.pub"), "--in", plain.to_str().unwrap(), "--out", ct.to_str().unwrap(),
    ]);
    assert!(enc.status.success());
    assert!(fs::read_to_string(&ct).unwrap().trim_end().ends_with("len=1000"));
    let dec = knapforge(&[
        "decrypt", "--key", &format!("{prefix}.priv"), "--in", ct.to_str().unwrap(), "--out", back.to_str().unwrap(),
    ]);
    assert!(dec.status.success());
    assert_eq!(fs::read(&back).unwrap(), data);
}

#[test]
fn seeded_keygen_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let pa = keygen(a.path(), "3", "10", "100", "42");
    let pb = keygen(b.path(), "3", "10", "100", "42");
    for ext in ["pub", "priv"] {
        assert_eq!(fs::read(format!("{pa}.{ext}")).unwrap(), fs::read(format!("{pb}.{ext}")).unwrap());
    }
    let pc = keygen(b.path(), "3", "10", "100", "43");
    assert_ne!(fs::read(format!("{pa}.pub")).unwrap(), fs::read(format!("{pc}.pub")).unwrap());
}

#[test]
fn bad_arguments_exit_2() {
    assert_eq!(knapforge(&["keygen", "--s", "8"]).status.code(), Some(2));
    assert_eq!(knapforge(&["frobnicate"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.pub");
    fs::write(&bad, "KNAPFORGE v1 2 pub\ns=3 M=2 variant=1\n5\n").unwrap();
    let out = knapforge(&["encrypt", "--key", bad.to_str().unwrap(), "--message", "101"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
}

#[test]
fn missing_file_exits_1() {
    assert_eq!(knapforge(&["encrypt", "--key", "/nonexistent/k.pub", "--message", "1"]).status.code(), Some(1));
}

#[test]
fn tampered_ciphertext_fails_softly_or_strictly() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = keygen(dir.path(), "2", "8", "100", "3");
    let privkey = format!("{prefix}.priv");
    let enc = knapforge(&["encrypt", "--key", &format!("{prefix}.pub"), "--message", "11111111"]);
    let ct: num_like::Big = stdout(&enc).trim().parse().unwrap();
    let tampered = ct.plus_one();
    let soft = knapforge(&["decrypt", "--key", &privkey, "--ct", &tampered]);
    assert_eq!(soft.status.code(), Some(0));
    assert!(stdout(&soft).starts_with("FAILURE"));
    let strict = knapforge(&["decrypt", "--key", &privkey, "--ct", &tampered, "--strict"]);
    assert_eq!(strict.status.code(), Some(3));
}

#[test]
fn corrupted_chunk_file_exits_3_under_strict() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = keygen(dir.path(), "2", "8", "100", "4");
    let ct = dir.path().join("ct.txt");
    fs::write(dir.path().join("p.bin"), b"hello").unwrap();
    let p = dir.path().join("p.bin");
    knapforge(&["encrypt", "--key", &format!("{prefix}.pub"), "--in", p.to_str().unwrap(), "--out", ct.to_str().unwrap()]);
    let text = fs::read_to_string(&ct).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    lines[2] = num_like::Big(lines[2].clone()).plus_one();
    fs::write(&ct, lines.join("\n") + "\n").unwrap();
    let out = knapforge(&["decrypt", "--key", &format!("{prefix}.priv"), "--in", ct.to_str().unwrap(), "--strict"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("block 2"), "{}", stdout(&out));
}

#[test]
fn reduce_prints_report() {
    let out = knapforge(&["reduce", "--n", "10403", "--seed", "1"]);
    assert!(out.status.success());
    let line = stdout(&out);
    assert!(line.starts_with("n=10403 factor="));
    let factor: u64 = line.split("factor=").nth(1).unwrap().split(' ').next().unwrap().parse().unwrap();
    assert!(factor == 101 || factor == 103);
    assert!(line.contains("stage=oracle subproblems=8"));
}

#[test]
fn experiments_print_records() {
    let out = knapforge(&["experiment", "uniqueness", "--s", "5", "--p-lo", "20", "--p-hi", "35", "--trials", "100", "--seed", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 101);
    assert_eq!(lines[0].split(' ').count(), 5);
    assert!(lines[100].starts_with("summary s=5"));
    let seq = knapforge(&["experiment", "uniqueness", "--s", "5", "--p-lo", "20", "--p-hi", "35", "--trials", "100", "--seed", "1", "--sequential"]);
    assert_eq!(stdout(&seq), text);

    let out = knapforge(&["experiment", "restsum", "--q", "2", "--s", "2"]);
    assert_eq!(stdout(&out).trim(), "q=2 s=2 p=3/4 value=0.750000 bound=3/4");
    let out = knapforge(&["experiment", "count-si", "--s", "2", "--t", "3"]);
    assert_eq!(stdout(&out).trim(), "s=2 t=3 S=2 C=4");
}

#[test]
fn stability_spec_from_toml() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    fs::write(&spec, "m = \"1011\"\nx0 = [\"3\", \"7\", \"19\", \"44\"]\neps = [\"1\", \"2\", \"4\", \"9\"]\nq = [\"1099511627777\"]\n").unwrap();
    let out = knapforge(&["experiment", "stability", "--spec", spec.to_str().unwrap(), "--samples", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(' ').collect();
    assert_eq!(row[0], "1099511627777");
    assert_eq!(row[2], "5");
}

#[test]
fn attack_recovers_low_density_message() {
    let dir = tempfile::tempdir().unwrap();
    let key = dir.path().join("w.pub");
    let w = ["536871011", "612345677", "701234561", "823456789", "934567891", "1012345679"];
    fs::write(&key, format!("KNAPFORGE v1 2 pub\ns=6 M=2 variant=1\n{}\n", w.join("\n"))).unwrap();
    let enc = knapforge(&["encrypt", "--key", key.to_str().unwrap(), "--message", "101101"]);
    let ct = stdout(&enc).trim().to_string();
    let out = knapforge(&["attack", "--key", key.to_str().unwrap(), "--ct", &ct]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("result=101101"), "{}", stdout(&out));
}

#[test]
fn key_size_bench_table() {
    let out = knapforge(&["bench", "--metric", "key_size", "--system", "2", "--s-list", "500,2000", "--p-list", "1e6,1e18"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("10^6") && text.contains("10^18"));
    assert_eq!(text.lines().count(), 4);
}

mod num_like {
    /// Decimal string arithmetic for tampering with ciphertexts.
    pub struct Big(pub String);

    impl std::str::FromStr for Big {
        type Err = ();
        fn from_str(s: &str) -> Result<Self, ()> {
            s.bytes().all(|b| b.is_ascii_digit()).then(|| Big(s.to_string())).ok_or(())
        }
    }

    impl Big {
        pub fn plus_one(&self) -> String {
            let mut d: Vec<u8> = self.0.bytes().map(|b| b - b'0').collect();
            let mut i = d.len();
            loop {
                if i == 0 {
                    d.insert(0, 1);
                    break;
                }
                i -= 1;
                if d[i] == 9 {
                    d[i] = 0;
                } else {
                    d[i] += 1;
                    break;
                }
            }
            d.iter().map(|v| (v + b'0') as char).collect()
        }
    }
}
