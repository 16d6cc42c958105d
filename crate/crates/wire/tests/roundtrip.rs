use proptest::prelude::*;
use taskscope_wire::{Ack, AckStatus, Command, Event, EventId, Frame, FrameReader, NameFrame};

fn event() -> impl Strategy<Value = Event> {
    (0usize..8, any::<[u64; 6]>()).prop_map(|(id, w)| Event {
        id: EventId::ALL[id],
        task: w[0],
        dep_task: w[1],
        handle: w[2],
        function: w[3],
        thread: w[4],
        timestamp_us: w[5],
    })
}

fn command() -> impl Strategy<Value = Command> {
    (0u8..9, any::<u64>()).prop_map(|(k, arg)| match k {
        0 => Command::Block(arg),
        1 => Command::Unblock(arg),
        2 => Command::Stop,
        3 => Command::Continue,
        4 => Command::Step,
        5 => Command::Prioritize(arg),
        6 => Command::Deprioritize(arg),
        7 => Command::BreakOnFunction(arg),
        _ => Command::Detach,
    })
}

fn frame() -> impl Strategy<Value = Frame> {
    prop_oneof![
        4 => event().prop_map(Frame::Event),
        1 => (any::<u64>(), ".{0,24}").prop_map(|(function, name)| Frame::Name(NameFrame { function, name })),
        1 => (1u64..10, any::<u64>(), 0u8..3, "[a-z ]{0,16}").prop_map(|(command, arg, s, why)| Frame::Ack(Ack {
            command,
            arg,
            status: match s {
                0 => AckStatus::Ok,
                1 => AckStatus::Ineffective(why),
                _ => AckStatus::Error(why),
            },
        })),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn event_round_trip(ev in event()) {
        let bytes = ev.encode();
        prop_assert_eq!(Event::decode(&bytes).unwrap(), ev);
        prop_assert_eq!(&bytes[56..], &[0u8; 8][..]);
    }

    #[test]
    fn command_round_trip(cmd in command()) {
        prop_assert_eq!(Command::decode(&cmd.encode()).unwrap(), cmd);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn concatenated_stream_decodes_without_resync(frames in prop::collection::vec(frame(), 0..40)) {
        let bytes: Vec<u8> = frames.iter().flat_map(Frame::encode).collect();
        let decoded: Vec<Frame> = FrameReader::new(&bytes[..]).collect::<Result<_, _>>().unwrap();
        prop_assert_eq!(decoded, frames);
    }
}
