import streamlit as st
from app.ui import cell_file_uploader, fixture_picker
from app.io_utils import ParseError, parse_cell_file, parse_certificate, format_step
from app.knot_utils import KnotDiagram, face_counts, euler_characteristic, is_tubular
from app.move_utils import enumerate_face_moves, subdivide_knot, Stuck
from app.search_utils import replay
from app.slice_utils import (SlicedComplex, StructureError, InvalidSlice, SquareType, carry_full,
                             classify_square_types, validate_sliced)
from app.fixture_utils import BUILTIN_KNOTS, product_cylinder, shift_cylinder
from app.config import CERT_FILE_MAGIC

st.set_page_config(page_title="CubeKnot - Cubical Knot Explorer", page_icon=":large_blue_square:",layout="wide",initial_sidebar_state="expanded")

st.markdown("""
<style>
    .stButton > button {
        background-color: #3b6ea5;
        color: white;
        border-radius: 0.5rem;
        border: none;
        padding: 0.5rem 1rem;
        font-weight: bold;
    }
    .stButton > button:hover {
        background-color: #2f5984;
    }
</style>
""", unsafe_allow_html=True)


if "complex" not in st.session_state:
    st.session_state.complex = None
if "certificate" not in st.session_state:
    st.session_state.certificate = None
if "source_name" not in st.session_state:
    st.session_state.source_name = ""

st.markdown("""
<div style="text-align: center; padding: 2rem 0;">
    <h1 style="color: #3b6ea5; font-size: 3rem; margin-bottom: 0.5rem;">CubeKnot</h1>
    <p style="font-size: 1.2rem; color: #666; margin-bottom: 2rem;">Cubical 2-knots, cubulated moves and isotopy cylinders</p>
</div>
""", unsafe_allow_html=True)

FIXTURES = dict(BUILTIN_KNOTS)
FIXTURES["product-cylinder"] = lambda scale: product_cylinder(BUILTIN_KNOTS["sphere"](scale))
FIXTURES["shift-cylinder"] = lambda scale: shift_cylinder(BUILTIN_KNOTS["sphere"](scale))

# Sidebar for loading
with st.sidebar:
    st.markdown("### 📁 Load")
    uploaded = cell_file_uploader()
    chosen = fixture_picker(FIXTURES)
    scale = st.number_input("Fixture scale", min_value=1, max_value=4, value=1)

    if st.button("Load", type="primary"):
        st.session_state.complex = None
        st.session_state.certificate = None
        try:
            if uploaded is not None:
                text = uploaded.getvalue().decode("utf-8")
                if text.lstrip().startswith(CERT_FILE_MAGIC):
                    st.session_state.certificate = parse_certificate(text)
                else:
                    st.session_state.complex = parse_cell_file(text)
                st.session_state.source_name = uploaded.name
            elif chosen != "(none)":
                built = FIXTURES[chosen](int(scale))
                st.session_state.complex = built.complex if isinstance(built, KnotDiagram) else built
                st.session_state.source_name = chosen
            else:
                st.warning("Pick a file or a fixture first.")
        except ParseError as exc:
            st.error(f"⚠️ Could not parse the file: {exc}")
        else:
            if st.session_state.complex is not None or st.session_state.certificate is not None:
                st.success(f"✅ Loaded {st.session_state.source_name}")

c = st.session_state.complex
seq = st.session_state.certificate

if seq is not None:
    st.markdown("### 📜 Certificate")
    st.write(f"{len(seq)} step(s) starting from a diagram with {len(seq.initial)} cells")
    with st.spinner("Replaying..."):
        result = replay(seq)
    if result:
        st.success(f"✅ Replay ok, final digest `{result.final_digest}`")
    else:
        st.error(f"⚠️ Rejected at step {result.failed_step}: {result.reason}")
    st.dataframe([{"step": i, "move": format_step(s)} for i, s in enumerate(seq.steps)], use_container_width=True)

elif c is not None and (c.dim, c.ctx.ambient_dim) == (3, 5):
    st.markdown("### 🧊 Cylinder")
    try:
        J = SlicedComplex.from_complex(c)
    except StructureError as exc:
        st.error(f"⚠️ {exc}")
    else:
        report = validate_sliced(J)
        m1, m2 = J.level_range
        st.write(f"{len(c)} cells, level range [{m1}, {m2}]")
        if report.valid:
            st.success("✅ Sliced by connected level sets, every slice is a 2-knot")
        else:
            for failure in report.failures:
                st.error(failure)
        rows = []
        for n in range(m1, m2 + 1):
            types = classify_square_types(J, n)
            row = {"level": n}
            for kind in SquareType:
                row[kind.value] = sum(1 for t in types.values() if t is kind)
            rows.append(row)
        st.dataframe(rows, use_container_width=True)
        if report.valid and st.button("Carry bottom slice to top slice"):
            with st.spinner("Sweeping level solids..."):
                try:
                    certificate = carry_full(J)
                except (Stuck, InvalidSlice, StructureError) as exc:
                    st.error(f"⚠️ {exc}")
                else:
                    st.success(f"✅ Certificate with {len(certificate)} move(s)")

elif c is not None:
    d = KnotDiagram(c)
    st.markdown("### 🪢 Knot diagram")
    col1, col2, col3 = st.columns(3)
    counts = face_counts(c)
    col1.metric("Cells", len(c))
    col2.metric("χ", euler_characteristic(c))
    col3.metric("Faces by dimension", " / ".join(str(n) for n in counts))

    if d.valid:
        st.success("✅ Valid knot diagram")
    else:
        for failure in d.report.failures:
            st.error(failure)
    st.json(d.report.to_dict())

    tubular, offending = is_tubular(d)
    if tubular:
        st.success("✅ Tubular neighbourhood condition holds")
    else:
        st.warning(f"{len(offending)} neighbourhood cell(s) break the tubular condition; try subdividing")

    if d.valid:
        st.markdown("#### Legal face boundary moves")
        with st.spinner("Enumerating moves..."):
            moves = enumerate_face_moves(d)
        st.dataframe([{"index": i, "move": format_step(mv)} for i, mv in enumerate(moves)], use_container_width=True)

    m = st.slider("Subdivision preview factor", min_value=2, max_value=4, value=2)
    fine = subdivide_knot(d, m)
    st.caption(f"After subdividing by {m}: {len(fine)} cells, face counts {face_counts(fine.complex)}")

else:
    st.info("Load a cell file, a certificate or a built-in fixture from the sidebar.")

# Footer
st.markdown("---")
st.markdown("""
<div style="text-align: center; color: #666; font-size: 0.9rem;">
    <p>Read-only explorer | use the `cubeknot` command line for editing and export</p>
</div>
""", unsafe_allow_html=True)
