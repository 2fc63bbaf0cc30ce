from app.store.files import OutputWriter, dump_json, mode_frame, read_json, read_lattice, read_mode, sweep_frame
