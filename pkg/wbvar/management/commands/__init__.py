# wbvar/management/commands/__init__.py
