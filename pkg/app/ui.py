import streamlit as st

def cell_file_uploader():
    return st.file_uploader("Upload a cell or certificate file", type=["cells", "cert", "txt"],
                            help="Plain-text files starting with 'cubeknot' or 'cubeknot-cert'.")

def fixture_picker(names):
    return st.selectbox("Or start from a built-in fixture", ["(none)"] + list(names))
