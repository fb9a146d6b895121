use proptest::prelude::*;
use stegostream_core::container::{build_wav, parse_carrier, ContainerError};

fn wav_strategy() -> impl Strategy<Value = Vec<u8>> {
    (
        prop_oneof![Just(8000u32), Just(22_050), Just(44_100), Just(48_000)],
        1u16..=2,
        proptest::collection::vec(any::<u8>(), 0..300),
        proptest::collection::vec(
            (
                proptest::array::uniform4(b'a'..=b'z')
                    .prop_filter("reserved id", |id| id != b"data"),
                proptest::collection::vec(any::<u8>(), 0..40),
            ),
            0..3,
        ),
    )
        .prop_map(|(rate, ch, data, extra)| build_wav(rate, ch, 16, &data, &extra))
}

proptest! {
    #[test]
    fn serialize_round_trips(wav in wav_strategy()) {
        let c = parse_carrier(wav.clone(), None).unwrap();
        prop_assert_eq!(c.serialize(), wav.clone());
        let again = parse_carrier(c.serialize(), None).unwrap();
        prop_assert_eq!(again.header_len(), c.header_len());
    }

    #[test]
    fn truncations_are_rejected(wav in wav_strategy(), cut in any::<prop::sample::Index>()) {
        let len = cut.index(wav.len());
        if len == 0 {
            prop_assert_eq!(parse_carrier(Vec::new(), None), Err(ContainerError::Empty));
        } else {
            prop_assert!(parse_carrier(wav[..len].to_vec(), None).is_err());
        }
    }

    #[test]
    fn corrupted_sizes_never_panic(wav in wav_strategy(), at in any::<prop::sample::Index>(), v in any::<u8>()) {
        let mut bytes = wav;
        let i = at.index(bytes.len());
        bytes[i] = v;
        if let Ok(c) = parse_carrier(bytes.clone(), None) {
            prop_assert!(c.header_len() <= c.body_end());
            prop_assert!(c.body_end() <= bytes.len());
        }
    }
}
