# Python module: __init__.py
