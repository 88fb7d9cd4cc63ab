using UnityEngine;

// __CLASS__ reads player input and drives the character body.
__NOTES__
[RequireComponent(typeof(Rigidbody2D))]
public class __CLASS__ : MonoBehaviour
{
    [SerializeField] private float moveSpeed = 6f;
    [SerializeField] private float jumpForce = 12f;
    [SerializeField] private int maxAirJumps = 1;
    [SerializeField] private LayerMask groundMask;
    [SerializeField] private Transform groundCheck;

    private Rigidbody2D body;
    private float horizontalInput;
    private bool jumpQueued;
    private int airJumpsLeft;

    public bool IsGrounded { get; private set; }

    private void Awake()
    {
        body = GetComponent<Rigidbody2D>();
    }

    private void Update()
    {
        horizontalInput = Input.GetAxisRaw("Horizontal");
        if (Input.GetButtonDown("Jump"))
        {
            jumpQueued = true;
        }
    }

    private void FixedUpdate()
    {
        IsGrounded = Physics2D.OverlapCircle(groundCheck.position, 0.1f, groundMask);
        if (IsGrounded)
        {
            airJumpsLeft = maxAirJumps;
        }
        body.velocity = new Vector2(horizontalInput * moveSpeed, body.velocity.y);
        if (jumpQueued)
        {
            TryJump();
            jumpQueued = false;
        }
    }

    public bool TryJump()
    {
        if (!IsGrounded && airJumpsLeft <= 0)
        {
            return false;
        }
        if (!IsGrounded)
        {
            airJumpsLeft--;
        }
        body.velocity = new Vector2(body.velocity.x, jumpForce);
        return true;
    }

    public void ApplyKnockback(Vector2 force)
    {
        body.AddForce(force, ForceMode2D.Impulse);
    }

    public Vector2 GetVelocity()
    {
        return body.velocity;
    }
}
