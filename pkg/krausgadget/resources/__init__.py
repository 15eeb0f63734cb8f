"""krausgadget - Resources"""
